#pragma once

// Umbrella header for the Topic-SCORE style spectral topic estimator:
// corpus handling, normalized truncated SVD with eigenvector ratios,
// two-stage vertex hunting, weight reconstruction, synthetic corpus
// generators and the evaluation harness.

#include "topicscore/corpus.hpp"
#include "topicscore/estimator.hpp"
#include "topicscore/eval.hpp"
#include "topicscore/io.hpp"
#include "topicscore/kmeans.hpp"
#include "topicscore/rng.hpp"
#include "topicscore/simplex.hpp"
#include "topicscore/spectral.hpp"
#include "topicscore/synth.hpp"
#include "topicscore/types.hpp"
#include "topicscore/vertex_hunt.hpp"
