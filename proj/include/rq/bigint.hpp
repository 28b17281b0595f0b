#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>

#include "rq/errors.hpp"

namespace rq {

using BigInt = boost::multiprecision::cpp_int;
using BigRat = boost::multiprecision::cpp_rational;

// Natural log of a positive big integer (double precision).
inline double log_bigint(const BigInt& n) {
  if (n <= 0) throw numeric_error("log_bigint: nonpositive argument");
  const std::size_t bits = boost::multiprecision::msb(n);
  if (bits < 63) return std::log(static_cast<double>(n.convert_to<std::uint64_t>()));
  BigInt top = n >> (bits - 62);
  return std::log(static_cast<double>(top.convert_to<std::uint64_t>())) +
         static_cast<double>(bits - 62) * std::log(2.0);
}

}  // namespace rq
