#include "sybillab/io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string_view>

#include "json.hpp"
#include "sybillab/error.hpp"

namespace sybillab {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  return in;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

// Splits on spaces/tabs/CR; returns up to `max_tokens` views.
std::size_t tokenize(std::string_view line, std::string_view* tokens, std::size_t max_tokens) {
  std::size_t count = 0;
  std::size_t i = 0;
  while (i < line.size() && count < max_tokens) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r' || line[i] == ',')) ++i;
    if (i >= line.size()) break;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r' && line[j] != ',') ++j;
    tokens[count++] = line.substr(i, j - i);
    i = j;
  }
  return count;
}

bool skippable(std::string_view line) {
  for (char c : line) {
    if (c == '#') return true;
    if (c != ' ' && c != '\t' && c != '\r') return false;
  }
  return true;
}

std::optional<std::uint64_t> parse_uint(std::string_view token) {
  std::uint64_t value = 0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) return std::nullopt;
  return value;
}

[[noreturn]] void malformed(const fs::path& path, std::size_t line_no, const std::string& why) {
  throw IoError(path.string() + ":" + std::to_string(line_no) + ": " + why);
}

std::optional<std::size_t> header_node_count(std::string_view line) {
  // "# nodes N ..."
  std::string_view tokens[3];
  std::size_t count = tokenize(line, tokens, 3);
  if (count >= 3 && tokens[0] == "#" && tokens[1] == "nodes") {
    if (auto v = parse_uint(tokens[2])) return static_cast<std::size_t>(*v);
  }
  return std::nullopt;
}

std::optional<Label> parse_label(std::string_view token) {
  if (token == "0" || token == "honest") return Label::Honest;
  if (token == "1" || token == "sybil") return Label::Sybil;
  return std::nullopt;
}

const char* label_name(Label l) { return l == Label::Sybil ? "sybil" : "honest"; }

std::string format_double(const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

}  // namespace

NodeId IdMap::intern(const std::string& token) {
  auto [it, inserted] = index_.try_emplace(token, static_cast<NodeId>(external_.size()));
  if (inserted) external_.push_back(token);
  return it->second;
}

std::optional<NodeId> IdMap::find(const std::string& token) const {
  auto it = index_.find(token);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

IdMap IdMap::identity(std::size_t n) {
  IdMap map;
  map.external_.reserve(n);
  map.index_.reserve(n);
  for (std::size_t i = 0; i < n; ++i) map.intern(std::to_string(i));
  return map;
}

LoadedGraph load_edge_list(const fs::path& path, Direction direction, IdPolicy ids) {
  auto in = open_in(path);
  IdMap map;
  std::vector<Edge> pairs;
  std::size_t declared_nodes = 0;
  std::size_t max_id_plus_one = 0;
  std::string line;
  std::string key;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (skippable(line)) {
      if (ids == IdPolicy::Numeric) {
        if (auto n = header_node_count(line)) declared_nodes = std::max(declared_nodes, *n);
      }
      continue;
    }
    std::string_view tokens[2];
    if (tokenize(line, tokens, 2) < 2) malformed(path, line_no, "expected 'u v'");
    NodeId endpoints[2];
    for (int k = 0; k < 2; ++k) {
      if (ids == IdPolicy::Numeric) {
        auto v = parse_uint(tokens[k]);
        if (!v || *v >= std::numeric_limits<NodeId>::max()) {
          malformed(path, line_no, "node id '" + std::string(tokens[k]) + "' is not a valid integer id");
        }
        endpoints[k] = static_cast<NodeId>(*v);
        max_id_plus_one = std::max<std::size_t>(max_id_plus_one, *v + 1);
      } else {
        key.assign(tokens[k]);
        endpoints[k] = map.intern(key);
      }
    }
    pairs.emplace_back(endpoints[0], endpoints[1]);
  }

  std::size_t n = ids == IdPolicy::Numeric ? std::max(declared_nodes, max_id_plus_one) : map.size();
  if (ids == IdPolicy::Numeric) map = IdMap::identity(n);

  if (direction == Direction::Mutual) {
    std::vector<std::uint64_t> directed;
    directed.reserve(pairs.size());
    for (auto [u, v] : pairs) {
      if (u != v) directed.push_back((std::uint64_t{u} << 32) | v);
    }
    std::sort(directed.begin(), directed.end());
    directed.erase(std::unique(directed.begin(), directed.end()), directed.end());
    std::vector<Edge> mutual;
    for (std::uint64_t key64 : directed) {
      auto u = static_cast<NodeId>(key64 >> 32);
      auto v = static_cast<NodeId>(key64 & 0xffffffffULL);
      if (u < v && std::binary_search(directed.begin(), directed.end(), (std::uint64_t{v} << 32) | u)) {
        mutual.emplace_back(u, v);
      }
    }
    pairs.swap(mutual);
  }
  return {Graph::from_edges(n, pairs), std::move(map)};
}

Graph load_graph(const fs::path& path) { return load_edge_list(path, Direction::Union, IdPolicy::Numeric).graph; }

void write_edge_list(const Graph& g, const fs::path& path) {
  auto out = open_out(path);
  out << "# nodes " << g.node_count() << " edges " << g.edge_count() << '\n';
  for (NodeId u = 0; u < g.node_count(); ++u) {
    for (NodeId v : g.neighbors(u)) {
      if (u < v) out << u << ' ' << v << '\n';
    }
  }
  if (!out) throw IoError("write failed: " + path.string());
}

void write_pairs(const std::vector<Edge>& pairs, const fs::path& path) {
  auto out = open_out(path);
  for (auto [u, v] : pairs) out << u << ' ' << v << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<Edge> load_pairs(const fs::path& path) {
  auto in = open_in(path);
  std::vector<Edge> pairs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (skippable(line)) continue;
    std::string_view tokens[2];
    if (tokenize(line, tokens, 2) < 2) malformed(path, line_no, "expected 'u v'");
    auto u = parse_uint(tokens[0]);
    auto v = parse_uint(tokens[1]);
    if (!u || !v) malformed(path, line_no, "expected integer ids");
    pairs.emplace_back(static_cast<NodeId>(*u), static_cast<NodeId>(*v));
  }
  return pairs;
}

LabelLoadResult load_labels(const fs::path& path, const IdMap& ids, UnlabeledPolicy policy) {
  auto in = open_in(path);
  constexpr std::uint8_t kUnset = 0xff;
  std::vector<std::uint8_t> raw(ids.size(), kUnset);
  std::string line;
  std::string key;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (skippable(line)) continue;
    std::string_view tokens[2];
    if (tokenize(line, tokens, 2) < 2) malformed(path, line_no, "expected 'node_id label'");
    key.assign(tokens[0]);
    auto id = ids.find(key);
    if (!id) malformed(path, line_no, "unknown node id '" + key + "'");
    auto label = parse_label(tokens[1]);
    if (!label) malformed(path, line_no, "label must be 0, 1, honest or sybil");
    auto value = static_cast<std::uint8_t>(*label);
    if (raw[*id] != kUnset && raw[*id] != value) {
      malformed(path, line_no, "conflicting label for node '" + key + "'");
    }
    raw[*id] = value;
  }

  LabelLoadResult result;
  std::vector<Label> labels(ids.size(), Label::Honest);
  for (NodeId v = 0; v < ids.size(); ++v) {
    if (raw[v] == kUnset) {
      if (policy == UnlabeledPolicy::Reject) {
        throw IoError(path.string() + ": node '" + ids.external(v) + "' has no label");
      }
      result.unlabeled.push_back(v);
    } else {
      labels[v] = static_cast<Label>(raw[v]);
    }
  }
  result.labels = RegionLabels(std::move(labels));
  return result;
}

void write_labels(const RegionLabels& labels, const fs::path& path) {
  auto out = open_out(path);
  for (NodeId v = 0; v < labels.size(); ++v) out << v << ' ' << label_name(labels[v]) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

void write_split(const TrainSplit& split, const fs::path& path) {
  auto out = open_out(path);
  for (NodeId v : split.known_honest) out << v << " honest\n";
  for (NodeId v : split.known_sybil) out << v << " sybil\n";
  if (!out) throw IoError("write failed: " + path.string());
}

TrainSplit load_split(const fs::path& path, std::size_t node_count) {
  auto in = open_in(path);
  TrainSplit split;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (skippable(line)) continue;
    std::string_view tokens[2];
    if (tokenize(line, tokens, 2) < 2) malformed(path, line_no, "expected 'node_id label'");
    auto id = parse_uint(tokens[0]);
    if (!id || *id >= node_count) malformed(path, line_no, "node id out of range");
    auto label = parse_label(tokens[1]);
    if (!label) malformed(path, line_no, "label must be 0, 1, honest or sybil");
    (*label == Label::Sybil ? split.known_sybil : split.known_honest).push_back(static_cast<NodeId>(*id));
  }
  for (auto* set : {&split.known_honest, &split.known_sybil}) {
    std::sort(set->begin(), set->end());
    set->erase(std::unique(set->begin(), set->end()), set->end());
  }
  std::vector<NodeId> both;
  std::set_intersection(split.known_honest.begin(), split.known_honest.end(), split.known_sybil.begin(),
                        split.known_sybil.end(), std::back_inserter(both));
  if (!both.empty()) throw IoError(path.string() + ": node " + std::to_string(both[0]) + " labeled both ways");
  return split;
}

void write_scores(const ScoreVector& scores, const fs::path& path, std::optional<double> threshold) {
  auto out = open_out(path);
  out << (threshold ? "node,score,label\n" : "node,score\n");
  char buf[64];
  for (std::size_t v = 0; v < scores.size(); ++v) {
    std::snprintf(buf, sizeof buf, "%.6g", scores[v]);
    out << v << ',' << buf;
    if (threshold) out << ',' << (scores[v] >= *threshold ? "sybil" : "honest");
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

ScoreVector load_scores(const fs::path& path) {
  auto in = open_in(path);
  ScoreVector scores;
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::pair<std::uint64_t, double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (skippable(line) || line.rfind("node", 0) == 0) continue;
    std::string_view tokens[2];
    if (tokenize(line, tokens, 2) < 2) malformed(path, line_no, "expected 'node,score'");
    auto id = parse_uint(tokens[0]);
    if (!id) malformed(path, line_no, "bad node id");
    double value = 0.0;
    try {
      value = std::stod(std::string(tokens[1]));
    } catch (const std::exception&) {
      malformed(path, line_no, "bad score");
    }
    rows.emplace_back(*id, value);
  }
  scores.values.assign(rows.size(), 0.0);
  std::vector<bool> seen(rows.size(), false);
  for (auto [id, value] : rows) {
    if (id >= rows.size() || seen[id]) throw IoError(path.string() + ": node ids must be a permutation of 0..n-1");
    seen[id] = true;
    scores.values[id] = value;
  }
  return scores;
}

ResultFormat format_for(const fs::path& path) {
  return path.extension() == ".json" ? ResultFormat::Json : ResultFormat::Csv;
}

namespace {

json record_to_json(const RunRecord& r) {
  return json{{"experiment", r.experiment},
              {"dataset", r.dataset},
              {"model", r.model},
              {"algorithm", r.algorithm},
              {"seed", r.seed},
              {"attack_edges_per_sybil", r.attack_edges_per_sybil},
              {"p_targeted", r.p_targeted},
              {"auc", r.auc},
              {"wall_ms", r.wall_ms},
              {"threshold", r.threshold},
              {"train_epochs", r.train_epochs}};
}

RunRecord record_from_json(const json& j) {
  RunRecord r;
  r.experiment = j.at("experiment").get<std::string>();
  r.dataset = j.at("dataset").get<std::string>();
  r.model = j.at("model").get<std::string>();
  r.algorithm = j.at("algorithm").get<std::string>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.attack_edges_per_sybil = j.at("attack_edges_per_sybil").get<double>();
  r.p_targeted = j.at("p_targeted").get<double>();
  r.auc = j.at("auc").get<double>();
  r.wall_ms = j.value("wall_ms", 0.0);
  r.threshold = j.value("threshold", 0.5);
  r.train_epochs = j.value("train_epochs", 0);
  return r;
}

constexpr std::string_view kCsvHeader =
    "experiment,dataset,model,algorithm,seed,attack_edges_per_sybil,p_targeted,auc,wall_ms";

void check_field(const std::string& s) {
  if (s.find_first_of(",\n\"") != std::string::npos) {
    throw InvalidArgument("result field '" + s + "' contains a CSV delimiter");
  }
}

}  // namespace

void write_results(const std::vector<RunRecord>& rows, const fs::path& path, ResultFormat format) {
  auto out = open_out(path);
  if (format == ResultFormat::Json) {
    json arr = json::array();
    for (const auto& r : rows) arr.push_back(record_to_json(r));
    out << arr.dump(2) << '\n';
  } else {
    out << kCsvHeader << '\n';
    for (const auto& r : rows) {
      for (const auto* s : {&r.experiment, &r.dataset, &r.model, &r.algorithm}) check_field(*s);
      out << r.experiment << ',' << r.dataset << ',' << r.model << ',' << r.algorithm << ',' << r.seed << ','
          << format_double("%g", r.attack_edges_per_sybil) << ',' << format_double("%g", r.p_targeted) << ','
          << format_double("%.6f", r.auc) << ',' << format_double("%.3f", r.wall_ms) << '\n';
    }
  }
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<RunRecord> load_results(const fs::path& path) {
  auto in = open_in(path);
  std::vector<RunRecord> rows;
  if (format_for(path) == ResultFormat::Json) {
    json arr;
    try {
      arr = json::parse(in);
    } catch (const json::exception& e) {
      throw IoError(path.string() + ": " + e.what());
    }
    for (const auto& j : arr) rows.push_back(record_from_json(j));
    return rows;
  }
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line == kCsvHeader) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 9) malformed(path, line_no, "expected 9 columns");
    RunRecord r;
    try {
      r.experiment = fields[0];
      r.dataset = fields[1];
      r.model = fields[2];
      r.algorithm = fields[3];
      r.seed = std::stoull(fields[4]);
      r.attack_edges_per_sybil = std::stod(fields[5]);
      r.p_targeted = std::stod(fields[6]);
      r.auc = std::stod(fields[7]);
      r.wall_ms = std::stod(fields[8]);
    } catch (const std::exception&) {
      malformed(path, line_no, "unparsable numeric field");
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace sybillab
