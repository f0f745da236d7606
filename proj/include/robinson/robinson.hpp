#pragma once

#include "robinson/errors.hpp"
#include "robinson/random.hpp"
#include "robinson/step_graphon.hpp"
#include "robinson/graphon_spec.hpp"
#include "robinson/spectral.hpp"
#include "robinson/cutnorm.hpp"
#include "robinson/gamma.hpp"
#include "robinson/robinson_approx.hpp"
#include "robinson/graph.hpp"
#include "robinson/graph_gamma.hpp"
#include "robinson/parallel.hpp"
#include "robinson/experiments.hpp"
