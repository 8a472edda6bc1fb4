#pragma once

#include <string>

#include <json.hpp>

#include "ccut/core.hpp"

namespace ccut {

using json = nlohmann::ordered_json;

json to_json(const Rational& r);
Rational rational_from_json(const json& j);  // accepts "p/q" strings and integers

json to_json(const Instance& inst);
Instance instance_from_json(const json& j);

json to_json(const Solution& s, int k);
Solution solution_from_json(const json& j, int k);

json to_json(const BalanceReport& rep, int k);

json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace ccut
