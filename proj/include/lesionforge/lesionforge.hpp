#pragma once

#include "lesionforge/image.hpp"
#include "lesionforge/rng.hpp"
#include "lesionforge/png_io.hpp"
#include "lesionforge/preprocess.hpp"
#include "lesionforge/ccl.hpp"
#include "lesionforge/patch.hpp"
#include "lesionforge/lesion_bank.hpp"
#include "lesionforge/augment.hpp"
#include "lesionforge/synth.hpp"
#include "lesionforge/eval.hpp"
#include "lesionforge/config.hpp"
#include "lesionforge/dataset.hpp"
#include "lesionforge/montage.hpp"
