#include "ctm/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "ctm/equilibrium.hpp"
#include "ctm/generalnet.hpp"
#include "ctm/network_io.hpp"
#include "ctm/traveltime.hpp"

namespace ctm::cli {

using nlohmann::json;

namespace {

constexpr double kMinutesPerHour = 60.0;

// Shortest round-trip representation; locale independent.
std::string num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string fixed(double x, int precision) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << std::fixed << std::setprecision(precision) << x;
  return os.str();
}

std::string minutes(Duration h) { return fixed(h * kMinutesPerHour, 4); }

json json_number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

// "0.25", "1/3" or "1e-2".
std::optional<double> parse_fraction(std::string s) {
  s.erase(std::remove_if(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); }), s.end());
  auto parse = [](const std::string& t) -> std::optional<double> {
    double v = 0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (res.ec != std::errc() || res.ptr != t.data() + t.size()) return std::nullopt;
    return v;
  };
  const auto slash = s.find('/');
  if (slash == std::string::npos) return parse(s);
  const auto a = parse(s.substr(0, slash));
  const auto b = parse(s.substr(slash + 1));
  if (!a || !b || *b == 0.0) return std::nullopt;
  return *a / *b;
}

RoutingVector parse_ratios(const std::string& list, std::size_t routes) {
  std::vector<double> ratios;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto v = parse_fraction(item);
    if (!v || !std::isfinite(*v) || *v < 0.0) throw InputError("--ratios: cannot read '" + item + "'");
    ratios.push_back(*v);
  }
  if (ratios.size() != routes) {
    throw InputError("--ratios: expected " + std::to_string(routes) + " ratios, got " + std::to_string(ratios.size()));
  }
  double sum = 0.0;
  for (double r : ratios) sum += r;
  if (std::abs(sum - 1.0) > 1e-9) throw InputError("--ratios: ratios sum to " + num(sum) + ", not 1");
  // Decimal input such as 0.1,0.2,0.7 is off by a few ulps.
  const auto largest = std::max_element(ratios.begin(), ratios.end());
  *largest += 1.0 - sum;
  return RoutingVector(std::move(ratios));
}

double parse_resolution(const std::string& text) {
  const auto v = parse_fraction(text);
  if (!v || !(*v > 0.0) || *v > 1.0) throw InputError("--resolution: expected a fraction in (0, 1], got '" + text + "'");
  return *v;
}

// Parallel network together with the file it came from.
struct Loaded {
  NetworkDocument doc;
  ParallelNetwork net;
  // file route -> position in the free-flow order
  std::vector<std::size_t> position;

  std::size_t file_route(std::size_t p) const { return net.input_order()[p] + 1; }
  std::vector<std::string> link_ids(std::size_t p) const { return doc.routes[net.input_order()[p]]; }
};

Loaded load_parallel(const std::string& path) {
  NetworkDocument doc = parse_network(path);
  if (doc.kind != NetworkKind::parallel) throw InputError(path + ": this command needs a parallel network");
  ParallelNetwork net = to_parallel(doc);
  std::vector<std::size_t> position(net.size());
  for (std::size_t p = 0; p < net.size(); ++p) position[net.input_order()[p]] = p;
  return {std::move(doc), std::move(net), std::move(position)};
}

Flow resolve_phi(const Loaded& in, const std::optional<double>& flag) {
  if (flag) return *flag;
  if (in.doc.exogenous_flow) return *in.doc.exogenous_flow;
  throw InputError("no exogenous flow: pass --phi or set exogenous_flow_veh_per_h in the file");
}

std::string index_list(const Loaded& in, const std::vector<std::size_t>& idx) {
  std::string s = "{";
  for (std::size_t i = 0; i < idx.size(); ++i) s += (i ? "," : "") + std::to_string(in.file_route(idx[i]));
  return s + "}";
}

std::string join(const std::vector<double>& xs, int precision) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? " " : "") + fixed(xs[i], precision);
  return s;
}

// Route table shared by wardrop and optimum.
struct RouteRow {
  double ratio;
  Flow flow;
  Duration time;
  Duration residual;
  std::vector<Density> densities;
};

std::vector<RouteRow> route_rows(const GameInstance& game, const TrafficAssignment& a,
                                 const std::vector<Duration>& residuals) {
  const auto times = check_wardrop(game, a, 0.0).route_times;
  std::vector<RouteRow> rows;
  for (std::size_t p = 0; p < game.network().size(); ++p) {
    rows.push_back({a.routing[p], a.route_flow(p), times[p], residuals.empty() ? 0.0 : residuals[p], a.densities[p]});
  }
  return rows;
}

void print_route_table(std::ostream& out, const Loaded& in, const std::vector<RouteRow>& rows) {
  out << std::left << std::setw(7) << "route" << std::setw(10) << "ratio" << std::setw(14) << "flow(veh/h)"
      << std::setw(12) << "time(min)" << std::setw(15) << "residual(min)"
      << "densities(veh/km)\n";
  for (std::size_t f = 0; f < rows.size(); ++f) {
    const RouteRow& r = rows[in.position[f]];
    out << std::left << std::setw(7) << f + 1 << std::setw(10) << fixed(r.ratio, 6) << std::setw(14)
        << fixed(r.flow, 2) << std::setw(12) << minutes(r.time) << std::setw(15) << minutes(r.residual)
        << join(r.densities, 4) << "\n";
  }
}

json route_rows_json(const Loaded& in, const std::vector<RouteRow>& rows) {
  json arr = json::array();
  for (std::size_t f = 0; f < rows.size(); ++f) {
    const std::size_t p = in.position[f];
    const RouteRow& r = rows[p];
    arr.push_back({{"route", f + 1},
                   {"links", in.link_ids(p)},
                   {"ratio", r.ratio},
                   {"flow_veh_per_h", r.flow},
                   {"travel_time_h", json_number(r.time)},
                   {"residual_h", r.residual},
                   {"densities_veh_per_km", r.densities}});
  }
  return arr;
}

void print_route_csv(std::ostream& out, const Loaded& in, const std::vector<RouteRow>& rows,
                     const std::string& prefix_header, const std::string& prefix) {
  out << prefix_header << "route,link,ratio,flow_veh_per_h,density_veh_per_km,travel_time_h,residual_h\n";
  for (std::size_t f = 0; f < rows.size(); ++f) {
    const std::size_t p = in.position[f];
    const RouteRow& r = rows[p];
    const auto ids = in.link_ids(p);
    for (std::size_t l = 0; l < r.densities.size(); ++l) {
      out << prefix << f + 1 << "," << ids[l] << "," << num(r.ratio) << "," << num(r.flow) << ","
          << num(r.densities[l]) << "," << num(r.time) << "," << num(r.residual) << "\n";
    }
  }
}

json optional_index(const Loaded& in, const std::optional<std::size_t>& i) {
  return i ? json(in.file_route(*i)) : json(nullptr);
}

// ---------------------------------------------------------------- wardrop

struct WardropOptions {
  std::string file;
  std::optional<double> phi;
  std::string format = "table";
};

int cmd_wardrop(const WardropOptions& o, std::ostream& out) {
  const Loaded in = load_parallel(o.file);
  const Flow phi = resolve_phi(in, o.phi);
  const GameInstance game(in.net, phi);
  const WardropSolution we = wardrop(game);
  const FlowInterval psi = psi_bounds(we, game);
  const auto rows = route_rows(game, we.assignment, we.residuals);
  const auto& idx = we.indices;

  if (o.format == "json") {
    json U = json::array();
    for (std::size_t p : idx.U) U.push_back(in.file_route(p));
    json doc{{"command", "wardrop"},
             {"network", to_json(in.doc)},
             {"phi_veh_per_h", phi},
             {"tag", to_string(we.kind)},
             {"partially_transferring", we.partially_transferring()},
             {"indices", {{"k", in.file_route(idx.k)}, {"U", U}, {"u", optional_index(in, idx.u)},
                          {"j", optional_index(in, idx.j)}}},
             {"common_time_h", we.common_time},
             {"psi_veh_per_h", {{"min", psi.lo}, {"max", psi.hi}}},
             {"assignment_psi_veh_per_h", we.assignment.psi()},
             {"family_flow_veh_per_h",
              we.family_flow ? json{{"min", we.family_flow->lo}, {"max", we.family_flow->hi}} : json(nullptr)},
             {"routes", route_rows_json(in, rows)}};
    out << doc.dump(2) << "\n";
  } else if (o.format == "csv") {
    const std::string prefix = std::string(to_string(we.kind)) + "," + num(we.common_time) + "," + num(psi.lo) +
                               "," + num(psi.hi) + ",";
    print_route_csv(out, in, rows, "tag,common_time_h,psi_min_veh_per_h,psi_max_veh_per_h,", prefix);
  } else {
    out << "equilibrium      " << to_string(we.kind) << "\n";
    out << "exogenous flow   " << fixed(phi, 2) << " veh/h\n";
    out << "indices          k=" << in.file_route(idx.k) << " U=" << index_list(in, idx.U);
    if (idx.u) out << " u=" << in.file_route(*idx.u) << " j=" << in.file_route(*idx.j);
    out << "\n";
    out << "common time      " << minutes(we.common_time) << " min\n";
    if (nearly_equal(psi.lo, psi.hi) || psi.lo == psi.hi) {
      out << "psi              " << fixed(psi.lo, 2) << " veh/h\n";
    } else {
      out << "psi              [" << fixed(psi.lo, 2) << ", " << fixed(psi.hi, 2)
          << "] veh/h over the equilibrium family; shown member " << fixed(we.assignment.psi(), 2) << "\n";
    }
    if (we.family_flow) {
      out << "route " << in.file_route(*idx.u) << " flow     any value in [" << fixed(we.family_flow->lo, 2) << ", "
          << fixed(we.family_flow->hi, 2) << "] veh/h\n";
    }
    out << "\n";
    print_route_table(out, in, rows);
  }
  return we.partially_transferring() ? kPartialTransfer : kSuccess;
}

// ---------------------------------------------------------------- optimum / poa

struct PhiOptions {
  std::string file;
  std::optional<double> phi;
  std::string format = "table";
};

int cmd_optimum(const PhiOptions& o, std::ostream& out) {
  const Loaded in = load_parallel(o.file);
  const Flow phi = resolve_phi(in, o.phi);
  const GameInstance game(in.net, phi);
  const SocialOptimum so = social_optimum(game);
  const auto rows = route_rows(game, so.assignment, {});

  if (o.format == "json") {
    json doc{{"command", "optimum"},
             {"network", to_json(in.doc)},
             {"phi_veh_per_h", phi},
             {"total_cost_veh_h", so.total_cost},
             {"routes", route_rows_json(in, rows)}};
    out << doc.dump(2) << "\n";
  } else if (o.format == "csv") {
    print_route_csv(out, in, rows, "total_cost_veh_h,", num(so.total_cost) + ",");
  } else {
    out << "social optimum   fully transferring, all routes in free flow\n";
    out << "exogenous flow   " << fixed(phi, 2) << " veh/h\n";
    out << "total cost       " << fixed(so.total_cost, 4) << " veh h\n\n";
    print_route_table(out, in, rows);
  }
  return kSuccess;
}

int cmd_poa(const PhiOptions& o, std::ostream& out) {
  const Loaded in = load_parallel(o.file);
  const Flow phi = resolve_phi(in, o.phi);
  const GameInstance game(in.net, phi);
  const PriceOfAnarchy poa = price_of_anarchy(game);
  const WardropSolution we = wardrop(game);
  const SocialOptimum so = social_optimum(game);
  const double we_cost = total_cost(in.net, we.assignment);

  if (o.format == "json") {
    json doc{{"command", "poa"},
             {"network", to_json(in.doc)},
             {"phi_veh_per_h", phi},
             {"price_of_anarchy", poa.value ? json(*poa.value) : json(nullptr)},
             {"note", poa.note},
             {"equilibrium_tag", to_string(we.kind)},
             {"equilibrium_cost_veh_h", we_cost},
             {"optimum_cost_veh_h", so.total_cost}};
    out << doc.dump(2) << "\n";
  } else if (o.format == "csv") {
    out << "phi_veh_per_h,poa_or_blank,equilibrium_tag,equilibrium_cost_veh_h,optimum_cost_veh_h\n";
    out << num(phi) << "," << (poa.value ? num(*poa.value) : "") << "," << to_string(we.kind) << "," << num(we_cost)
        << "," << num(so.total_cost) << "\n";
  } else {
    out << "exogenous flow     " << fixed(phi, 2) << " veh/h\n";
    out << "equilibrium        " << to_string(we.kind) << ", cost " << fixed(we_cost, 4) << " veh h\n";
    out << "social optimum     cost " << fixed(so.total_cost, 4) << " veh h\n";
    if (poa.value) {
      out << "price of anarchy   " << fixed(*poa.value, 6) << "\n";
    } else {
      out << "price of anarchy   undefined (partially transferring WE)\n";
    }
  }
  return poa.value ? kSuccess : kPartialTransfer;
}

// ---------------------------------------------------------------- assign

struct AssignOptions {
  std::string file;
  std::optional<double> phi;
  std::string ratios;
  std::string format = "table";
};

int cmd_assign(const AssignOptions& o, std::ostream& out) {
  const Loaded in = load_parallel(o.file);
  const Flow phi = resolve_phi(in, o.phi);
  if (!(phi >= 0.0) || !std::isfinite(phi)) throw InputError("--phi must be non-negative");

  // Ratios are given in file order.
  const RoutingVector file_routing = parse_ratios(o.ratios, in.net.size());
  std::vector<double> sorted(in.net.size());
  for (std::size_t p = 0; p < in.net.size(); ++p) sorted[p] = file_routing[in.net.input_order()[p]];
  const RoutingVector routing(sorted);

  const ConsistentFamily fam = consistent_density(in.net, phi, routing);
  const TransferAccount acc = transfer_accounting(in.net, phi, routing);
  const TrafficAssignment a = canonical_assignment(in.net, phi, routing);

  std::vector<std::string> notes;
  for (std::size_t f = 0; f < in.net.size(); ++f) {
    const std::size_t p = in.position[f];
    const Flow excess = phi * routing[p] - acc.transferred[p];
    if (fam.routes[p].cls == RouteClass::saturated) {
      notes.push_back("route " + std::to_string(f + 1) + " is offered " + fixed(phi * routing[p], 2) +
                      " veh/h but carries its capacity " + fixed(acc.transferred[p], 2) + " veh/h; " +
                      fixed(excess, 2) + " veh/h stay out of the network");
    }
  }

  if (o.format == "json") {
    json routes = json::array();
    for (std::size_t f = 0; f < in.net.size(); ++f) {
      const std::size_t p = in.position[f];
      const auto& rf = fam.routes[p];
      const auto ids = in.link_ids(p);
      json frontiers = json::array();
      for (const auto& fr : rf.frontiers) {
        frontiers.push_back({{"link", ids[fr.link]}, {"min_veh_per_km", fr.lower}, {"max_veh_per_km", fr.upper}});
      }
      routes.push_back({{"route", f + 1},
                        {"links", ids},
                        {"class", to_string(rf.cls)},
                        {"ratio", routing[p]},
                        {"nominal_flow_veh_per_h", rf.nominal},
                        {"transferred_veh_per_h", acc.transferred[p]},
                        {"densities_veh_per_km", rf.canonical},
                        {"frontier_intervals", frontiers},
                        {"travel_time_h", json_number(route_travel_time(in.net[p], a.densities[p], a.flows[p]))}});
    }
    json doc{{"command", "assign"},
             {"network", to_json(in.doc)},
             {"phi_veh_per_h", phi},
             {"ratios", file_routing.ratios()},
             {"fully_transferring", acc.fully_transferring()},
             {"psi_veh_per_h", acc.psi},
             {"notes", notes},
             {"routes", routes}};
    out << doc.dump(2) << "\n";
  } else if (o.format == "csv") {
    out << "route,link,class,ratio,transferred_veh_per_h,density_veh_per_km,frontier_min_veh_per_km,"
           "frontier_max_veh_per_km,psi_veh_per_h\n";
    for (std::size_t f = 0; f < in.net.size(); ++f) {
      const std::size_t p = in.position[f];
      const auto& rf = fam.routes[p];
      const auto ids = in.link_ids(p);
      for (std::size_t l = 0; l < rf.canonical.size(); ++l) {
        std::string lo, hi;
        for (const auto& fr : rf.frontiers) {
          if (fr.link == l) {
            lo = num(fr.lower);
            hi = num(fr.upper);
          }
        }
        out << f + 1 << "," << ids[l] << "," << to_string(rf.cls) << "," << num(routing[p]) << ","
            << num(acc.transferred[p]) << "," << num(rf.canonical[l]) << "," << lo << "," << hi << ","
            << num(acc.psi) << "\n";
      }
    }
  } else {
    out << "exogenous flow   " << fixed(phi, 2) << " veh/h\n";
    out << "transfer         " << (acc.fully_transferring() ? "full" : "partial") << ", psi " << fixed(acc.psi, 2)
        << " veh/h\n\n";
    for (std::size_t f = 0; f < in.net.size(); ++f) {
      const std::size_t p = in.position[f];
      const auto& rf = fam.routes[p];
      const auto ids = in.link_ids(p);
      out << "route " << f + 1 << "  " << to_string(rf.cls) << "  ratio " << fixed(routing[p], 6) << "  transferred "
          << fixed(acc.transferred[p], 2) << " veh/h  time "
          << minutes(route_travel_time(in.net[p], a.densities[p], a.flows[p])) << " min\n";
      out << "  densities (veh/km)  " << join(rf.canonical, 4) << "\n";
      for (const auto& fr : rf.frontiers) {
        out << "  or congestion front on " << ids[fr.link] << " at [" << fixed(fr.lower, 4) << ", "
            << fixed(fr.upper, 4) << "] veh/km\n";
      }
    }
    for (const auto& n : notes) out << "note: " << n << "\n";
  }
  return acc.fully_transferring() ? kSuccess : kPartialTransfer;
}

// ---------------------------------------------------------------- sweep

struct SweepOptions {
  std::string file;
  double from = 0;
  double to = 0;
  std::size_t steps = 25;
  std::string out = "-";
};

struct SweepRow {
  double phi = 0;
  bool flagged = false;
  std::string line;
};

SweepRow sweep_row(const Loaded& in, double phi) {
  SweepRow row{phi, false, num(phi) + ","};
  try {
    const GameInstance game(in.net, phi);
    const WardropSolution we = wardrop(game);
    const FlowInterval psi = psi_bounds(we, game);
    const PriceOfAnarchy poa = price_of_anarchy(game);
    const auto& idx = we.indices;
    row.line += std::string(to_string(we.kind)) + "," + num(we.common_time * kMinutesPerHour) + "," + num(psi.lo) +
                "," + num(psi.hi) + "," + (poa.value ? num(*poa.value) : "") + "," +
                std::to_string(in.file_route(idx.k)) + "," + (idx.u ? std::to_string(in.file_route(*idx.u)) : "") +
                "," + (idx.j ? std::to_string(in.file_route(*idx.j)) : "");
  } catch (const AssumptionViolation&) {
    row.flagged = true;
    row.line += "assumption-2-violated,,,,,,,";
  }
  return row;
}

int cmd_sweep(const SweepOptions& o, std::ostream& out, std::ostream& err) {
  const Loaded in = load_parallel(o.file);
  if (o.steps == 0) throw InputError("--steps must be at least 1");
  if (!(o.from > 0.0) || !(o.to >= o.from)) throw InputError("need 0 < --phi-from <= --phi-to");

  std::vector<SweepRow> rows(o.steps);
  const std::size_t workers = std::max(1u, std::min(std::thread::hardware_concurrency(), 8u));
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < o.steps; i += workers) {
          const double phi = o.steps == 1 ? o.from : o.from + (o.to - o.from) * double(i) / double(o.steps - 1);
          rows[i] = sweep_row(in, phi);
        }
      });
    }
  }

  std::ofstream file;
  std::ostream* dest = &out;
  if (o.out != "-") {
    file.open(o.out, std::ios::binary);
    if (!file) throw InputError(o.out + ": cannot open for writing");
    dest = &file;
  }
  *dest << "phi,we_tag,common_time_min,psi_min,psi_max,poa_or_blank,k,u_or_blank,j_or_blank\n";
  std::size_t flagged = 0;
  for (const auto& r : rows) {
    *dest << r.line << "\n";
    flagged += r.flagged;
  }
  if (flagged > 0) {
    err << "warning: " << flagged << " row(s) exceed the min-cut capacity " << num(in.net.min_cut_capacity())
        << " veh/h\n";
    return kAssumptionViolation;
  }
  return kSuccess;
}

// ---------------------------------------------------------------- diagram

struct DiagramOptions {
  std::string file;
  std::string link;
  std::size_t samples = 101;
  std::string out = "-";
};

int cmd_diagram(const DiagramOptions& o, std::ostream& out) {
  const NetworkDocument doc = parse_network(o.file);
  if (o.samples < 2) throw InputError("--samples must be at least 2");
  const auto it = std::find_if(doc.links.begin(), doc.links.end(), [&](const LinkRecord& l) { return l.id == o.link; });
  if (it == doc.links.end()) throw InputError("--link: unknown link id '" + o.link + "'");
  const Link link(it->params);

  std::ofstream file;
  std::ostream* dest = &out;
  if (o.out != "-") {
    file.open(o.out, std::ios::binary);
    if (!file) throw InputError(o.out + ": cannot open for writing");
    dest = &file;
  }
  *dest << "x_veh_per_km,supply_veh_per_h,demand_veh_per_h,flow_veh_per_h,travel_time_h\n";
  for (std::size_t i = 0; i < o.samples; ++i) {
    const double x = link.jam_density() * double(i) / double(o.samples - 1);
    const Flow s = supply(link, x);
    const Flow d = demand(link, x);
    const Flow f = std::min(s, d);
    *dest << num(x) << "," << num(s) << "," << num(d) << "," << num(f) << "," << num(link_travel_time(link, x, f))
          << "\n";
  }
  return kSuccess;
}

// ---------------------------------------------------------------- demo-wheatstone

struct DemoOptions {
  double phi = 1600;
  std::string resolution = "1/64";
  double eps_min = 2.0;
  std::string format = "table";
};

int cmd_demo_wheatstone(const DemoOptions& o, std::ostream& out) {
  if (!(o.phi >= 0.0) || !std::isfinite(o.phi)) throw InputError("--phi must be non-negative");
  if (!(o.eps_min >= 0.0)) throw InputError("--eps-min must be non-negative");
  const double resolution = parse_resolution(o.resolution);
  const GeneralNetwork net = wheatstone();
  const SearchResult res = search_equilibrium(net, o.phi, resolution, o.eps_min / kMinutesPerHour);
  const bool found = !res.survivors.empty();
  const std::optional<EquilibriumCandidate> shown = found ? std::optional(res.survivors.front()) : res.best;
  const std::string note =
      "densities are steady states of the proportional-merge cell dynamics; link 2 cannot carry 700 veh/h at "
      "51.41 veh/km (its diagram gives 17.5 free-flow or 117.5 congested), so that density is not expected here";

  if (o.format == "json") {
    json survivors = json::array();
    for (const auto& c : res.survivors) {
      survivors.push_back({{"ratios", c.routing.ratios()},
                           {"route_times_h", c.times},
                           {"violation_h", c.violation},
                           {"psi_veh_per_h", c.state.psi},
                           {"densities_veh_per_km", c.state.density},
                           {"flows_veh_per_h", c.state.flow},
                           {"converged", c.state.converged}});
    }
    json doc{{"command", "demo-wheatstone"},
             {"phi_veh_per_h", o.phi},
             {"resolution", resolution},
             {"eps_h", o.eps_min / kMinutesPerHour},
             {"evaluated", res.evaluated},
             {"unconverged", res.unconverged},
             {"survivors", survivors},
             {"closest",
              shown ? json{{"ratios", shown->routing.ratios()},
                           {"route_times_h", shown->times},
                           {"violation_h", shown->violation},
                           {"psi_veh_per_h", shown->state.psi},
                           {"densities_veh_per_km", shown->state.density}}
                    : json(nullptr)},
             {"note", note}};
    out << doc.dump(2) << "\n";
  } else {
    out << "bridge network, exogenous flow " << fixed(o.phi, 2) << " veh/h, grid 1/"
        << std::llround(1.0 / resolution) << ", tolerance " << fixed(o.eps_min, 2) << " min\n";
    out << "grid points " << res.evaluated << ", unconverged " << res.unconverged << ", survivors "
        << res.survivors.size() << "\n";
    if (!found) out << "no grid point is an equilibrium within the tolerance; closest point:\n";
    if (shown) {
      out << "routing          " << join(std::vector<double>(shown->routing.ratios().begin(),
                                                             shown->routing.ratios().end()),
                                       6)
          << "\n";
      for (std::size_t r = 0; r < shown->times.size(); ++r) {
        out << "route " << r + 1 << " time     " << minutes(shown->times[r]) << " min"
            << (shown->routing[r] > 0.0 ? "" : " (unused)") << "\n";
      }
      out << "violation        " << minutes(shown->violation) << " min\n";
      out << "psi              " << fixed(shown->state.psi, 2) << " veh/h\n";
      out << "link densities   " << join(shown->state.density, 4) << " veh/km\n";
      out << "link flows       " << join(shown->state.flow, 2) << " veh/h\n";
    }
    out << "note: " << note << "\n";
  }
  return found && res.survivors.front().state.psi > kRelTol * std::max(1.0, o.phi) ? kPartialTransfer : kSuccess;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Routing games on cell-transmission networks", "ctm"};
  app.require_subcommand(1);
  const auto formats = CLI::IsMember({"table", "json", "csv"});

  WardropOptions wo;
  auto* wardrop_cmd = app.add_subcommand("wardrop", "Wardrop equilibrium of a parallel network");
  wardrop_cmd->add_option("network", wo.file, "network file")->required();
  wardrop_cmd->add_option("--phi", wo.phi, "exogenous flow (veh/h)");
  wardrop_cmd->add_option("--format", wo.format, "table, json or csv")->check(formats);

  PhiOptions oo;
  auto* optimum_cmd = app.add_subcommand("optimum", "Social optimum of a parallel network");
  optimum_cmd->add_option("network", oo.file, "network file")->required();
  optimum_cmd->add_option("--phi", oo.phi, "exogenous flow (veh/h)");
  optimum_cmd->add_option("--format", oo.format, "table, json or csv")->check(formats);

  PhiOptions po;
  auto* poa_cmd = app.add_subcommand("poa", "Price of anarchy of a parallel network");
  poa_cmd->add_option("network", po.file, "network file")->required();
  poa_cmd->add_option("--phi", po.phi, "exogenous flow (veh/h)");
  poa_cmd->add_option("--format", po.format, "table, json or csv")->check(formats);

  AssignOptions ao;
  auto* assign_cmd = app.add_subcommand("assign", "Consistent densities for a routing vector");
  assign_cmd->add_option("network", ao.file, "network file")->required();
  assign_cmd->add_option("--phi", ao.phi, "exogenous flow (veh/h)");
  assign_cmd->add_option("--ratios", ao.ratios, "routing ratios in file order, e.g. 0.75,0.25 or 1/3,2/3")->required();
  assign_cmd->add_option("--format", ao.format, "table, json or csv")->check(formats);

  SweepOptions so;
  auto* sweep_cmd = app.add_subcommand("sweep", "Equilibrium summary over a range of exogenous flows (CSV)");
  sweep_cmd->add_option("network", so.file, "network file")->required();
  sweep_cmd->add_option("--phi-from", so.from, "first exogenous flow (veh/h)")->required();
  sweep_cmd->add_option("--phi-to", so.to, "last exogenous flow (veh/h)")->required();
  sweep_cmd->add_option("--steps", so.steps, "number of rows");
  sweep_cmd->add_option("--out", so.out, "output CSV path, - for stdout");

  DiagramOptions dgo;
  auto* diagram_cmd = app.add_subcommand("diagram", "Fundamental diagram samples of one link (CSV)");
  diagram_cmd->add_option("network", dgo.file, "network file")->required();
  diagram_cmd->add_option("--link", dgo.link, "link id")->required();
  diagram_cmd->add_option("--samples", dgo.samples, "number of uniform density samples");
  diagram_cmd->add_option("--out", dgo.out, "output CSV path, - for stdout");

  DemoOptions dmo;
  auto* demo_cmd = app.add_subcommand("demo-wheatstone", "Grid search for equilibria on the five-link bridge network");
  demo_cmd->add_option("--phi", dmo.phi, "exogenous flow (veh/h)");
  demo_cmd->add_option("--resolution", dmo.resolution, "grid step, e.g. 1/64");
  demo_cmd->add_option("--eps-min", dmo.eps_min, "equal-time tolerance (min)");
  demo_cmd->add_option("--format", dmo.format, "table or json")->check(CLI::IsMember({"table", "json"}));

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kInputError;
  }

  try {
    if (*wardrop_cmd) return cmd_wardrop(wo, out);
    if (*optimum_cmd) return cmd_optimum(oo, out);
    if (*poa_cmd) return cmd_poa(po, out);
    if (*assign_cmd) return cmd_assign(ao, out);
    if (*sweep_cmd) return cmd_sweep(so, out, err);
    if (*diagram_cmd) return cmd_diagram(dgo, out);
    if (*demo_cmd) return cmd_demo_wheatstone(dmo, out);
  } catch (const AssumptionViolation& e) {
    err << "error: " << e.what() << "\n";
    return kAssumptionViolation;
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kInputError;
}

}  // namespace ctm::cli
