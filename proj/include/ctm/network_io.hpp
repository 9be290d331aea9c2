#pragma once

// JSON network files (schema version "1").
//
//   {
//     "schema_version": "1",
//     "kind": "parallel" | "general",
//     "exogenous_flow_veh_per_h": 1500,            (optional)
//     "links": [{"id": "l1", "capacity_veh_per_h": ..., "jam_density_veh_per_km": ...,
//                "free_speed_km_per_h": ..., "length_km": ...,
//                "tail": "O", "head": "A"}],       (tail/head: general only)
//     "origin": "O", "destination": "D",           (general only)
//     "routes": [["l1", "l2"], ...]
//   }

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ctm/fundamental.hpp"
#include "ctm/generalnet.hpp"

namespace ctm {

// Malformed or invalid input file.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class NetworkKind { parallel, general };

struct LinkRecord {
  std::string id;
  LinkParams params;
  std::string tail;  // general only
  std::string head;  // general only
};

struct NetworkDocument {
  std::string schema_version = "1";
  NetworkKind kind = NetworkKind::parallel;
  std::vector<LinkRecord> links;
  std::vector<std::vector<std::string>> routes;
  std::string origin;       // general only
  std::string destination;  // general only
  std::optional<Flow> exogenous_flow;

  const LinkRecord& link(const std::string& id) const;
};

// Throws InputError on syntax errors (with line and column) or schema
// violations (naming the field), and AssumptionViolation when the network
// breaks a model assumption.
NetworkDocument parse_network(const std::string& path);
NetworkDocument parse_network_text(const std::string& text, const std::string& source = "<input>");

nlohmann::json to_json(const NetworkDocument& doc);

// Route p of the result is file route input_order()[p].
ParallelNetwork to_parallel(const NetworkDocument& doc);
GeneralNetwork to_general(const NetworkDocument& doc);

}  // namespace ctm
