#pragma once

#include "cnn.hpp"
#include "conv.hpp"
#include "errors.hpp"
#include "io.hpp"
#include "mrr.hpp"
#include "parallel.hpp"
#include "perf.hpp"
#include "pwb.hpp"
#include "quant.hpp"
#include "tensor.hpp"
#include "train.hpp"
#include "version.hpp"
