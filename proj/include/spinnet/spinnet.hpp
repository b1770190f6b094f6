#pragma once

#include "spinnet/error.hpp"
#include "spinnet/exact_value.hpp"
#include "spinnet/geometry.hpp"
#include "spinnet/graph.hpp"
#include "spinnet/montecarlo.hpp"
#include "spinnet/projector.hpp"
#include "spinnet/recoupling.hpp"
#include "spinnet/su2.hpp"
#include "spinnet/tensor.hpp"
