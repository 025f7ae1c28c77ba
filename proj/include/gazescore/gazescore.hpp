#pragma once

// Umbrella header for the full library surface. The checkpoint header is
// excluded on purpose: it depends on the vendored nlohmann/json header, so
// translation units opt into it explicitly.

#include "gazescore/baselines.hpp"
#include "gazescore/dataset.hpp"
#include "gazescore/episodes.hpp"
#include "gazescore/errors.hpp"
#include "gazescore/estimator.hpp"
#include "gazescore/experiment.hpp"
#include "gazescore/grad_check.hpp"
#include "gazescore/lstm.hpp"
#include "gazescore/metrics.hpp"
#include "gazescore/model.hpp"
#include "gazescore/regression.hpp"
#include "gazescore/rng.hpp"
#include "gazescore/shapley.hpp"
#include "gazescore/synthetic.hpp"
#include "gazescore/tape.hpp"
#include "gazescore/tensor.hpp"
#include "gazescore/trainer.hpp"
