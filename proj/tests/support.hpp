#pragma once

#include <string>

#include "ccut/core.hpp"

namespace ccut::testing {

inline Rational R(const char* s) { return parse_rational(s); }

inline Valuation U(const char* a, const char* b) { return Valuation::uniform(R(a), R(b)); }

inline Instance inst_of(std::vector<Valuation> agents, int k = 2) { return Instance::make(std::move(agents), k); }

}  // namespace ccut::testing
