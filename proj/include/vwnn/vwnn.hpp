#pragma once

#include "vwnn/activation.hpp"
#include "vwnn/baselines.hpp"
#include "vwnn/data.hpp"
#include "vwnn/errors.hpp"
#include "vwnn/evaluation.hpp"
#include "vwnn/layers.hpp"
#include "vwnn/network.hpp"
#include "vwnn/rng.hpp"
#include "vwnn/serialize.hpp"
#include "vwnn/tensor.hpp"
