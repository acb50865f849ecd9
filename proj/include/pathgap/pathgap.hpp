#pragma once

#include "pathgap/bounds.hpp"
#include "pathgap/errors.hpp"
#include "pathgap/estimators.hpp"
#include "pathgap/functionals.hpp"
#include "pathgap/geometry.hpp"
#include "pathgap/malliavin.hpp"
#include "pathgap/parallel.hpp"
#include "pathgap/path_sim.hpp"
#include "pathgap/report.hpp"
#include "pathgap/stats.hpp"
