#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "lesionforge/image.hpp"

namespace lesionforge {

enum class Connectivity : int { Four = 4, Eight = 8 };

inline Connectivity connectivity_from_int(int n) {
  if (n == 4) return Connectivity::Four;
  if (n == 8) return Connectivity::Eight;
  throw std::invalid_argument("connectivity must be 4 or 8");
}

struct ComponentLabels {
  int width = 0;
  int height = 0;
  std::vector<std::int32_t> labels;  // 0 = background, components numbered 1..count
  int count = 0;

  std::int32_t at(int x, int y) const { return labels[static_cast<std::size_t>(y) * width + x]; }
};

namespace ccl_detail {

class DisjointSet {
 public:
  std::int32_t make() {
    parent_.push_back(static_cast<std::int32_t>(parent_.size()));
    return parent_.back();
  }

  std::int32_t find(std::int32_t x) {
    std::int32_t root = x;
    while (parent_[root] != root) root = parent_[root];
    while (parent_[x] != root) {
      const std::int32_t next = parent_[x];
      parent_[x] = root;
      x = next;
    }
    return root;
  }

  // Smaller provisional label becomes the root.
  void unite(std::int32_t a, std::int32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (a < b)
      parent_[b] = a;
    else
      parent_[a] = b;
  }

  std::size_t size() const { return parent_.size(); }

 private:
  std::vector<std::int32_t> parent_;
};

}  // namespace ccl_detail

// Two-pass raster-scan labeling with union-find equivalences. Final labels are
// consecutive and ordered by each component's first pixel in raster order.
inline ComponentLabels label_components(const BinaryMask& mask,
                                        Connectivity conn = Connectivity::Eight) {
  ComponentLabels out;
  out.width = mask.width;
  out.height = mask.height;
  out.labels.assign(mask.bits.size(), 0);

  ccl_detail::DisjointSet sets;
  sets.make();  // slot 0 is background

  const int w = mask.width;
  auto label_at = [&](int x, int y) -> std::int32_t {
    if (x < 0 || y < 0 || x >= w) return 0;
    return out.labels[static_cast<std::size_t>(y) * w + x];
  };

  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!mask.at(x, y)) continue;
      // Already-visited neighbours: W, N, and for 8-connectivity NW, NE.
      std::int32_t neighbours[4] = {label_at(x - 1, y), label_at(x, y - 1), 0, 0};
      if (conn == Connectivity::Eight) {
        neighbours[2] = label_at(x - 1, y - 1);
        neighbours[3] = label_at(x + 1, y - 1);
      }
      std::int32_t chosen = 0;
      for (std::int32_t n : neighbours) {
        if (n == 0) continue;
        if (chosen == 0)
          chosen = n;
        else
          sets.unite(chosen, n);
      }
      if (chosen == 0) chosen = sets.make();
      out.labels[static_cast<std::size_t>(y) * w + x] = chosen;
    }
  }

  std::vector<std::int32_t> final_label(sets.size(), 0);
  for (auto& l : out.labels) {
    if (l == 0) continue;
    const std::int32_t root = sets.find(l);
    if (final_label[root] == 0) final_label[root] = ++out.count;
    l = final_label[root];
  }
  return out;
}

inline BinaryMask component_mask(const ComponentLabels& labels, std::int32_t id) {
  BinaryMask m(labels.width, labels.height);
  for (std::size_t i = 0; i < labels.labels.size(); ++i) m.bits[i] = labels.labels[i] == id;
  return m;
}

// Pixel count per label; index 0 holds the background count.
inline std::vector<std::size_t> component_areas(const ComponentLabels& labels) {
  std::vector<std::size_t> areas(static_cast<std::size_t>(labels.count) + 1, 0);
  for (auto l : labels.labels) ++areas[l];
  return areas;
}

}  // namespace lesionforge
