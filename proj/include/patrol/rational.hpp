#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include "patrol/logspace.hpp"

namespace patrol {

using Rational = boost::multiprecision::cpp_rational;

}  // namespace patrol
