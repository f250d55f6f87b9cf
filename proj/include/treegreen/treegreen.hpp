#pragma once

#include "treegreen/cli.hpp"
#include "treegreen/coeffs.hpp"
#include "treegreen/conditions.hpp"
#include "treegreen/config.hpp"
#include "treegreen/edge_function.hpp"
#include "treegreen/edgeode.hpp"
#include "treegreen/errors.hpp"
#include "treegreen/expression.hpp"
#include "treegreen/graph.hpp"
#include "treegreen/green.hpp"
#include "treegreen/ode.hpp"
#include "treegreen/oracle.hpp"
#include "treegreen/quadrature.hpp"
