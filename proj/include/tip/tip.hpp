#pragma once

#include "tip/adam.hpp"
#include "tip/autodiff.hpp"
#include "tip/checkpoint.hpp"
#include "tip/dataset_io.hpp"
#include "tip/decoder.hpp"
#include "tip/encoder.hpp"
#include "tip/graph.hpp"
#include "tip/metrics.hpp"
#include "tip/report_io.hpp"
#include "tip/tensor.hpp"
#include "tip/training.hpp"
