#pragma once

#include "hyperyolo/backbone.hpp"
#include "hyperyolo/conv.hpp"
#include "hyperyolo/distance.hpp"
#include "hyperyolo/error.hpp"
#include "hyperyolo/hyperconv.hpp"
#include "hyperyolo/hypergraph.hpp"
#include "hyperyolo/hyt1.hpp"
#include "hyperyolo/image.hpp"
#include "hyperyolo/neck.hpp"
#include "hyperyolo/numeric.hpp"
#include "hyperyolo/presets.hpp"
#include "hyperyolo/random.hpp"
#include "hyperyolo/rng.hpp"
#include "hyperyolo/synth.hpp"
#include "hyperyolo/tensor.hpp"
#include "hyperyolo/tensor_ops.hpp"
#include "hyperyolo/weights_io.hpp"
