#include "qhdalm/problem_json.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>

namespace qhdalm {

namespace {

using nlohmann::json;

json parse_document(const std::string& text) {
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) fail(ErrorCode::Io, "malformed JSON document");
  return doc;
}

std::vector<std::string> variable_names(const NlpProblem& p) {
  std::vector<std::string> names;
  names.reserve(p.variables.size());
  for (const auto& v : p.variables) names.push_back(v.name);
  return names;
}

}  // namespace

NlpProblem problem_from_json(const std::string& text) {
  const json doc = parse_document(text);
  NlpProblem p;
  try {
    if (doc.value("format_version", 1) != 1)
      fail(ErrorCode::Io, "unsupported problem format_version");
    p.name = doc.value("name", "");
    const std::string sense = doc.value("sense", "min");
    if (sense == "min")
      p.sense = Sense::Min;
    else if (sense == "max")
      p.sense = Sense::Max;
    else
      fail(ErrorCode::Io, "sense must be 'min' or 'max'");
    for (const auto& v : doc.at("variables")) {
      VarSpec spec;
      spec.name = v.at("name").get<std::string>();
      spec.lb = v.at("lb").get<double>();
      spec.ub = v.at("ub").get<double>();
      p.variables.push_back(std::move(spec));
    }
    const auto names = variable_names(p);
    p.objective = parse_prefix(doc.at("objective").get<std::string>(), names);
    if (doc.contains("equalities"))
      for (const auto& s : doc.at("equalities"))
        p.equalities.push_back(parse_prefix(s.get<std::string>(), names));
    if (doc.contains("inequalities"))
      for (const auto& s : doc.at("inequalities"))
        p.inequalities.push_back(parse_prefix(s.get<std::string>(), names));
  } catch (const json::exception& e) {
    fail(ErrorCode::Io, std::string("problem document: ") + e.what());
  }
  return p;
}

NlpProblem load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open problem file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return problem_from_json(buf.str());
}

std::string problem_to_json(const NlpProblem& p, int indent) {
  const auto names = variable_names(p);
  json doc;
  doc["format_version"] = 1;
  doc["name"] = p.name;
  doc["sense"] = p.sense == Sense::Min ? "min" : "max";
  doc["variables"] = json::array();
  for (const auto& v : p.variables)
    doc["variables"].push_back({{"name", v.name}, {"lb", v.lb}, {"ub", v.ub}});
  doc["objective"] = to_prefix(p.objective, names);
  doc["equalities"] = json::array();
  for (const auto& g : p.equalities) doc["equalities"].push_back(to_prefix(g, names));
  doc["inequalities"] = json::array();
  for (const auto& h : p.inequalities) doc["inequalities"].push_back(to_prefix(h, names));
  return doc.dump(indent) + "\n";
}

void save_problem(const std::string& path, const NlpProblem& p) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::Io, "cannot write problem file: " + path);
  out << problem_to_json(p);
}

}  // namespace qhdalm
