#pragma once

#include <csg/baselines.hpp>
#include <csg/bench.hpp>
#include <csg/combinatorics.hpp>
#include <csg/ip_search.hpp>
#include <csg/scan.hpp>
#include <csg/value_model.hpp>
