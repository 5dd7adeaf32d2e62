// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace sopot {

// Bad argument values: non-finite samples, empty vectors, out-of-range norms.
class invalid_input : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// A configuration the library recognizes but does not implement.
class unsupported_config : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// to_matrix() requires at most one term per (position, depth) cell.
class not_canonical : public std::logic_error {
public:
  not_canonical() : std::logic_error("approximation is not canonical; call merge_canonical first") {}
};

// File parsing and writing problems.
class format_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace sopot
