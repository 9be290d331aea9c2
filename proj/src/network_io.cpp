#include "ctm/network_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace ctm {

using nlohmann::json;

namespace {

constexpr const char* kLinkFields[] = {"id", "capacity_veh_per_h", "jam_density_veh_per_km", "free_speed_km_per_h",
                                       "length_km", "tail", "head"};
constexpr const char* kTopFields[] = {"schema_version", "kind",   "links",      "routes",
                                      "origin",         "destination", "exogenous_flow_veh_per_h"};

class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const std::string& field, const std::string& what) const {
    throw InputError(source_ + ": " + field + ": " + what);
  }

  const json& require(const json& obj, const std::string& key, const std::string& path) const {
    const auto it = obj.find(key);
    if (it == obj.end()) fail(path + key, "missing");
    return *it;
  }

  std::string text(const json& obj, const std::string& key, const std::string& path) const {
    const json& v = require(obj, key, path);
    if (!v.is_string()) fail(path + key, "expected a string");
    return v.get<std::string>();
  }

  double number(const json& obj, const std::string& key, const std::string& path) const {
    const json& v = require(obj, key, path);
    if (!v.is_number()) fail(path + key, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x) || x <= 0.0) fail(path + key, "must be positive and finite");
    return x;
  }

  template <std::size_t N>
  void only(const json& obj, const char* const (&allowed)[N], const std::string& path) const {
    for (const auto& [key, _] : obj.items()) {
      if (std::find_if(std::begin(allowed), std::end(allowed), [&](const char* a) { return key == a; }) ==
          std::end(allowed)) {
        fail(path + key, "unknown field");
      }
    }
  }

 private:
  std::string source_;
};

std::pair<std::size_t, std::size_t> line_and_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1, column = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

}  // namespace

const LinkRecord& NetworkDocument::link(const std::string& id) const {
  const auto it = std::find_if(links.begin(), links.end(), [&](const LinkRecord& l) { return l.id == id; });
  if (it == links.end()) throw InputError("unknown link id '" + id + "'");
  return *it;
}

NetworkDocument parse_network(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(path + ": cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_network_text(buf.str(), path);
}

NetworkDocument parse_network_text(const std::string& text, const std::string& source) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, column] = line_and_column(text, e.byte);
    throw InputError(source + ":" + std::to_string(line) + ":" + std::to_string(column) + ": syntax error: " +
                     e.what());
  }
  const Reader rd(source);
  if (!root.is_object()) rd.fail("(root)", "expected an object");
  rd.only(root, kTopFields, "");

  NetworkDocument doc;
  doc.schema_version = rd.text(root, "schema_version", "");
  if (doc.schema_version != "1") rd.fail("schema_version", "unsupported version '" + doc.schema_version + "'");
  const std::string kind = rd.text(root, "kind", "");
  if (kind == "parallel") {
    doc.kind = NetworkKind::parallel;
  } else if (kind == "general") {
    doc.kind = NetworkKind::general;
  } else {
    rd.fail("kind", "expected 'parallel' or 'general'");
  }
  const bool general = doc.kind == NetworkKind::general;
  if (root.contains("exogenous_flow_veh_per_h")) doc.exogenous_flow = rd.number(root, "exogenous_flow_veh_per_h", "");

  const json& links = rd.require(root, "links", "");
  if (!links.is_array() || links.empty()) rd.fail("links", "expected a non-empty array");
  std::set<std::string> ids;
  for (std::size_t i = 0; i < links.size(); ++i) {
    const std::string path = "links[" + std::to_string(i) + "].";
    const json& l = links[i];
    if (!l.is_object()) rd.fail(path.substr(0, path.size() - 1), "expected an object");
    rd.only(l, kLinkFields, path);
    LinkRecord rec;
    rec.id = rd.text(l, "id", path);
    if (!ids.insert(rec.id).second) rd.fail(path + "id", "duplicate id '" + rec.id + "'");
    rec.params.capacity = rd.number(l, "capacity_veh_per_h", path);
    rec.params.jam_density = rd.number(l, "jam_density_veh_per_km", path);
    rec.params.free_speed = rd.number(l, "free_speed_km_per_h", path);
    rec.params.length = rd.number(l, "length_km", path);
    if (general) {
      rec.tail = rd.text(l, "tail", path);
      rec.head = rd.text(l, "head", path);
    } else if (l.contains("tail") || l.contains("head")) {
      rd.fail(path + (l.contains("tail") ? "tail" : "head"), "only allowed in general networks");
    }
    try {
      Link check(rec.params);
    } catch (const DomainError& e) {
      rd.fail(path.substr(0, path.size() - 1) + " ('" + rec.id + "')", e.what());
    }
    doc.links.push_back(std::move(rec));
  }

  const json& routes = rd.require(root, "routes", "");
  if (!routes.is_array() || routes.empty()) rd.fail("routes", "expected a non-empty array");
  std::set<std::string> used;
  for (std::size_t r = 0; r < routes.size(); ++r) {
    const std::string path = "routes[" + std::to_string(r) + "]";
    if (!routes[r].is_array() || routes[r].empty()) rd.fail(path, "expected a non-empty array of link ids");
    std::vector<std::string> route;
    for (std::size_t i = 0; i < routes[r].size(); ++i) {
      const json& id = routes[r][i];
      const std::string at = path + "[" + std::to_string(i) + "]";
      if (!id.is_string()) rd.fail(at, "expected a link id");
      if (!ids.contains(id.get<std::string>())) rd.fail(at, "unknown link id '" + id.get<std::string>() + "'");
      if (!general && !used.insert(id.get<std::string>()).second) {
        rd.fail(at, "link '" + id.get<std::string>() + "' appears on more than one route");
      }
      route.push_back(id.get<std::string>());
    }
    doc.routes.push_back(std::move(route));
  }

  if (general) {
    doc.origin = rd.text(root, "origin", "");
    doc.destination = rd.text(root, "destination", "");
    try {
      (void)to_general(doc);
    } catch (const DomainError& e) {
      rd.fail("routes", e.what());
    }
  } else {
    if (root.contains("origin") || root.contains("destination")) {
      rd.fail(root.contains("origin") ? "origin" : "destination", "only allowed in general networks");
    }
    (void)to_parallel(doc);
  }
  return doc;
}

nlohmann::json to_json(const NetworkDocument& doc) {
  const bool general = doc.kind == NetworkKind::general;
  json out;
  out["schema_version"] = doc.schema_version;
  out["kind"] = general ? "general" : "parallel";
  if (doc.exogenous_flow) out["exogenous_flow_veh_per_h"] = *doc.exogenous_flow;
  out["links"] = json::array();
  for (const auto& l : doc.links) {
    json j{{"id", l.id},
           {"capacity_veh_per_h", l.params.capacity},
           {"jam_density_veh_per_km", l.params.jam_density},
           {"free_speed_km_per_h", l.params.free_speed},
           {"length_km", l.params.length}};
    if (general) {
      j["tail"] = l.tail;
      j["head"] = l.head;
    }
    out["links"].push_back(std::move(j));
  }
  if (general) {
    out["origin"] = doc.origin;
    out["destination"] = doc.destination;
  }
  out["routes"] = doc.routes;
  return out;
}

ParallelNetwork to_parallel(const NetworkDocument& doc) {
  if (doc.kind != NetworkKind::parallel) throw InputError("expected a parallel network");
  std::vector<Route> routes;
  for (std::size_t r = 0; r < doc.routes.size(); ++r) {
    std::vector<Link> links;
    for (const auto& id : doc.routes[r]) links.emplace_back(doc.link(id).params);
    try {
      routes.emplace_back(std::move(links));
    } catch (const AssumptionViolation& e) {
      throw AssumptionViolation(e.assumption(), "route " + std::to_string(r + 1) + ": " + e.what());
    }
  }
  return validate_network(std::move(routes));
}

GeneralNetwork to_general(const NetworkDocument& doc) {
  if (doc.kind != NetworkKind::general) throw InputError("expected a general network");
  std::map<std::string, std::size_t> nodes;
  auto node = [&](const std::string& name) { return nodes.emplace(name, nodes.size()).first->second; };
  std::map<std::string, std::size_t> index;
  std::vector<GeneralLink> links;
  for (const auto& l : doc.links) {
    index[l.id] = links.size();
    const std::size_t tail = node(l.tail);
    links.push_back({Link(l.params), tail, node(l.head)});
  }
  if (!nodes.contains(doc.origin)) throw DomainError("origin '" + doc.origin + "' is not a link endpoint");
  if (!nodes.contains(doc.destination)) {
    throw DomainError("destination '" + doc.destination + "' is not a link endpoint");
  }
  std::vector<std::vector<std::size_t>> routes;
  for (const auto& route : doc.routes) {
    std::vector<std::size_t> ids;
    for (const auto& id : route) ids.push_back(index.at(id));
    routes.push_back(std::move(ids));
  }
  return GeneralNetwork(std::move(links), nodes.at(doc.origin), nodes.at(doc.destination), std::move(routes));
}

}  // namespace ctm
