#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mixeq/netmodel.hpp"

namespace mixeq {

/// Parsed network file: the network plus the optional declared path list.
struct NetworkDocument {
  Network network;
  std::optional<std::vector<std::vector<LinkId>>> paths;

  /// Declared paths when the file lists them, enumerated paths otherwise.
  PathSet path_set() const;
};

/// Parses the JSON network format. Throws Error(schema_error) naming the
/// offending field (or the line of a syntax error), or the netmodel error
/// when the content is well-formed but the network is invalid.
NetworkDocument parse_network_json(std::string_view text);

/// Reads and parses a file. Throws Error(io_error) when it cannot be read.
NetworkDocument load_network_file(const std::string& path);

/// Polynomial form {id, from, to, k, b, n} for every link; BPR links are
/// written in their converted form.
std::string serialize_network_json(const Network& network,
                                   const std::optional<std::vector<std::vector<LinkId>>>& paths =
                                       std::nullopt);

}  // namespace mixeq
