#include "mixeq/network_file.hpp"

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include <json.hpp>

#include "mixeq/error.hpp"

namespace mixeq {

namespace {

using nlohmann::json;

[[noreturn]] void schema(const std::string& where, const std::string& what) {
  throw Error(Errc::schema_error, where + ": " + what);
}

void only_keys(const json& obj, const std::string& where,
               std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) schema(where, "expected an object");
  for (const auto& item : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
      schema(where, "unknown key \"" + item.key() + "\"");
    }
  }
}

const json& required(const json& obj, const std::string& where, const std::string& key) {
  const auto it = obj.find(key);
  if (it == obj.end()) schema(where, "missing key \"" + key + "\"");
  return *it;
}

std::string as_string(const json& value, const std::string& where) {
  if (!value.is_string()) schema(where, "expected a string");
  return value.get<std::string>();
}

double as_number(const json& value, const std::string& where) {
  if (!value.is_number()) schema(where, "expected a number");
  return value.get<double>();
}

CostParams parse_cost(const json& link, const std::string& where) {
  const bool polynomial = link.contains("k") || link.contains("b") || link.contains("n");
  if (link.contains("bpr")) {
    if (polynomial) schema(where, "give either k/b/n or bpr, not both");
    const json& bpr = link["bpr"];
    const std::string at = where + ".bpr";
    only_keys(bpr, at, {"t0", "m", "theta", "beta"});
    try {
      return CostParams::bpr(as_number(required(bpr, at, "t0"), at + ".t0"),
                             as_number(required(bpr, at, "m"), at + ".m"),
                             as_number(required(bpr, at, "theta"), at + ".theta"),
                             as_number(required(bpr, at, "beta"), at + ".beta"));
    } catch (const Error& e) {
      if (e.code() == Errc::schema_error) throw;
      schema(at, e.what());
    }
  }
  const double k = as_number(required(link, where, "k"), where + ".k");
  const double b = as_number(required(link, where, "b"), where + ".b");
  const double n = link.contains("n") ? as_number(link["n"], where + ".n") : 1.0;
  try {
    return CostParams::polynomial(k, b, n);
  } catch (const Error& e) {
    schema(where, e.what());
  }
}

std::size_t line_of(std::string_view text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + byte, '\n'));
}

}  // namespace

PathSet NetworkDocument::path_set() const {
  return paths ? declare_paths(network, *paths) : enumerate_paths(network);
}

NetworkDocument parse_network_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw Error(Errc::schema_error,
                "line " + std::to_string(line_of(text, e.byte == 0 ? 0 : e.byte - 1)) +
                    ": malformed JSON (" + e.what() + ")");
  }
  only_keys(doc, "document", {"nodes", "links", "od", "paths"});

  const json& nodes_json = required(doc, "document", "nodes");
  if (!nodes_json.is_array()) schema("nodes", "expected an array");
  std::vector<NodeId> nodes;
  for (std::size_t i = 0; i < nodes_json.size(); ++i) {
    nodes.push_back(as_string(nodes_json[i], "nodes[" + std::to_string(i) + "]"));
  }

  const json& links_json = required(doc, "document", "links");
  if (!links_json.is_array()) schema("links", "expected an array");
  std::vector<Link> links;
  for (std::size_t i = 0; i < links_json.size(); ++i) {
    const std::string where = "links[" + std::to_string(i) + "]";
    const json& l = links_json[i];
    only_keys(l, where, {"id", "from", "to", "k", "b", "n", "bpr"});
    Link link;
    link.id = as_string(required(l, where, "id"), where + ".id");
    link.tail = as_string(required(l, where, "from"), where + ".from");
    link.head = as_string(required(l, where, "to"), where + ".to");
    link.cost = parse_cost(l, where);
    links.push_back(std::move(link));
  }

  const json& od = required(doc, "document", "od");
  only_keys(od, "od", {"origin", "destination", "demand"});
  const NodeId origin = as_string(required(od, "od", "origin"), "od.origin");
  const NodeId destination = as_string(required(od, "od", "destination"), "od.destination");
  const double demand = od.contains("demand") ? as_number(od["demand"], "od.demand") : 1.0;
  if (demand != 1.0) schema("od.demand", "demand must equal 1");

  std::optional<std::vector<std::vector<LinkId>>> paths;
  if (doc.contains("paths")) {
    const json& paths_json = doc["paths"];
    if (!paths_json.is_array()) schema("paths", "expected an array");
    paths.emplace();
    for (std::size_t p = 0; p < paths_json.size(); ++p) {
      const std::string where = "paths[" + std::to_string(p) + "]";
      if (!paths_json[p].is_array()) schema(where, "expected an array of link ids");
      std::vector<LinkId> ids;
      for (std::size_t j = 0; j < paths_json[p].size(); ++j) {
        ids.push_back(as_string(paths_json[p][j], where + "[" + std::to_string(j) + "]"));
      }
      paths->push_back(std::move(ids));
    }
  }

  NetworkDocument out{Network(std::move(nodes), std::move(links), origin, destination, demand),
                      std::move(paths)};
  if (out.paths) declare_paths(out.network, *out.paths);
  return out;
}

NetworkDocument load_network_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_error, "cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw Error(Errc::io_error, "cannot read " + path);
  return parse_network_json(buffer.str());
}

std::string serialize_network_json(const Network& network,
                                   const std::optional<std::vector<std::vector<LinkId>>>& paths) {
  json doc;
  doc["nodes"] = network.nodes();
  json links = json::array();
  for (const Link& l : network.links()) {
    links.push_back({{"id", l.id},
                     {"from", l.tail},
                     {"to", l.head},
                     {"k", l.cost.k},
                     {"b", l.cost.b},
                     {"n", l.cost.n}});
  }
  doc["links"] = std::move(links);
  doc["od"] = {{"origin", network.origin()},
               {"destination", network.destination()},
               {"demand", network.demand()}};
  if (paths) doc["paths"] = *paths;
  return doc.dump(2) + "\n";
}

}  // namespace mixeq
