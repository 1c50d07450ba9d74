#pragma once

#include "retmap/analysis.hpp"
#include "retmap/calculus.hpp"
#include "retmap/dynamics.hpp"
#include "retmap/geometry.hpp"
#include "retmap/maps.hpp"
#include "retmap/profile.hpp"
#include "retmap/runner.hpp"
#include "retmap/sampling.hpp"
#include "retmap/scenario.hpp"
