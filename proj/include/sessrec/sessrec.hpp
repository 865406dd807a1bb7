#pragma once

// Session-based news recommendation with implicit positive (active time),
// negative (impression-window sampling) and neutral (start/publish time)
// feedback, on a small self-contained autodiff core.

#include "sessrec/adam.hpp"
#include "sessrec/checkpoint.hpp"
#include "sessrec/common.hpp"
#include "sessrec/data.hpp"
#include "sessrec/graph.hpp"
#include "sessrec/kernels.hpp"
#include "sessrec/metrics.hpp"
#include "sessrec/model.hpp"
#include "sessrec/negsample.hpp"
#include "sessrec/parameter.hpp"
#include "sessrec/pipeline.hpp"
#include "sessrec/ranking.hpp"
#include "sessrec/rng.hpp"
#include "sessrec/synthetic.hpp"
#include "sessrec/temporal.hpp"
#include "sessrec/tensor.hpp"
#include "sessrec/train.hpp"
