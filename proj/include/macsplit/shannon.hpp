#pragma once

namespace macsplit {

// Scalar domain quantities. Powers and NIS values are linear power units
// (arbitrary scale); rates are bits per channel use (base-2 logs).
using Power = double;
using Rate = double;
using Nis = double;  // noise-plus-interference power a stream can tolerate

// Relative tolerance used by all equality comparisons unless overridden.
inline constexpr double kDefaultTolerance = 1e-9;

/// Capacity of a single AWGN stream: 0.5 * log2(1 + power / nis).
/// Throws std::domain_error if nis <= 0 or power < 0 (or non-finite).
Rate capacity(Power power, Nis nis);

/// Largest noise-plus-interference power under which a stream with the given
/// transmit power still achieves `rate`: power / (2^(2*rate) - 1). This is
/// the exact inverse of capacity() in its second argument.
/// Throws std::domain_error if rate <= 0 or power <= 0 (or non-finite).
Nis nis_for_rate(Rate rate, Power power);

/// |a - b| <= tol * max(|scale|, tiny).
bool rel_close(double a, double b, double tol, double scale);

}  // namespace macsplit
