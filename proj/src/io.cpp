#include "ccut/io.hpp"

#include <fstream>
#include <sstream>

namespace ccut {

json to_json(const Rational& r) { return to_string(r); }

Rational rational_from_json(const json& j) {
  if (j.is_string()) return parse_rational(j.get<std::string>());
  if (j.is_number_integer()) return Rational(Integer(std::to_string(j.get<long long>())));
  throw ParseError("expected a rational as \"p/q\" string, got " + j.dump());
}

json to_json(const Instance& inst) {
  json agents = json::array();
  for (const auto& a : inst.agents) {
    json blocks = json::array();
    for (const auto& b : a.blocks())
      blocks.push_back({{"left", to_json(b.left)}, {"right", to_json(b.right)}, {"height", to_json(b.height)}});
    agents.push_back({{"blocks", std::move(blocks)}});
  }
  return {{"k", inst.k},
          {"domain_right", to_json(inst.domain_right)},
          {"cut_budget", inst.cut_budget},
          {"agents", std::move(agents)}};
}

Instance instance_from_json(const json& j) {
  try {
    Instance inst;
    inst.k = j.value("k", 2);
    inst.domain_right = j.contains("domain_right") ? rational_from_json(j.at("domain_right")) : Rational(1);
    for (const auto& a : j.at("agents")) {
      std::vector<Block> blocks;
      for (const auto& b : a.at("blocks"))
        blocks.push_back({rational_from_json(b.at("left")), rational_from_json(b.at("right")),
                          rational_from_json(b.at("height"))});
      inst.agents.emplace_back(std::move(blocks));
    }
    inst.cut_budget = j.value("cut_budget", (inst.k - 1) * static_cast<int>(inst.agents.size()));
    inst.validate();
    return inst;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed instance: ") + e.what());
  }
}

json to_json(const Solution& s, int k) {
  json cuts = json::array(), labels = json::array();
  for (const auto& c : s.cuts) cuts.push_back(to_json(c));
  for (Label l : s.labels) labels.push_back(label_name(l, k));
  return {{"cuts", std::move(cuts)}, {"labels", std::move(labels)}};
}

Solution solution_from_json(const json& j, int k) {
  try {
    Solution s;
    for (const auto& c : j.at("cuts")) s.cuts.push_back(rational_from_json(c));
    if (j.contains("labels")) {
      for (const auto& l : j.at("labels")) s.labels.push_back(parse_label(l.get<std::string>(), k));
    } else if (k == 2) {
      s = Solution::alternating(std::move(s.cuts));
    } else {
      throw ParseError("solution needs explicit labels for k > 2");
    }
    return s;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed solution: ") + e.what());
  }
}

json to_json(const BalanceReport& rep, int k) {
  json agents = json::array();
  for (std::size_t i = 0; i < rep.mass.size(); ++i) {
    json masses = json::object();
    for (int l = 0; l < k; ++l) masses[label_name(l, k)] = to_json(rep.mass[i][l]);
    agents.push_back({{"mass", std::move(masses)}, {"discrepancy", to_json(rep.discrepancy[i])}});
  }
  return {{"satisfied", rep.satisfied}, {"max_discrepancy", to_json(rep.max_discrepancy)}, {"agents", std::move(agents)}};
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << text;
}

}  // namespace ccut
