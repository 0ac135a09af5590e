#pragma once

#include "algorithms/registry.hpp"
#include "core.hpp"
#include "errors.hpp"
#include "io.hpp"
#include "preprocess.hpp"
#include "rng.hpp"
#include "synth.hpp"
#include "validation.hpp"
#include "viz.hpp"
