#include "sybillab/config_json.hpp"

#include <fstream>
#include <set>

#include "sybillab/error.hpp"

namespace sybillab {

namespace {

void check_keys(const json& j, std::initializer_list<const char*> allowed, const char* what) {
  if (!j.is_object()) throw InvalidArgument(std::string(what) + " must be a JSON object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items()) {
    if (!ok.count(key)) throw InvalidArgument(std::string(what) + ": unknown key \"" + key + "\"");
  }
}

template <typename T>
void read_opt(const json& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end()) out = it->get<T>();
}

}  // namespace

json region_to_json(const RegionModel& model) {
  struct Visitor {
    json operator()(const BarabasiAlbertModel& ba) const { return {{"model", "ba"}, {"n", ba.n}, {"m", ba.m}}; }
    json operator()(const PowerLawClusterModel& pl) const {
      return {{"model", "pl"}, {"n", pl.n}, {"m", pl.m}, {"p", pl.p}};
    }
    json operator()(const EdgeFileModel& f) const {
      return {{"model", "file"}, {"path", f.path}, {"direction", f.mutual_only ? "mutual" : "union"}};
    }
  };
  return std::visit(Visitor{}, model);
}

RegionModel region_from_json(const json& j) {
  if (!j.is_object() || !j.contains("model")) throw InvalidArgument("region needs a \"model\" key");
  const auto kind = j.at("model").get<std::string>();
  if (kind == "ba") {
    check_keys(j, {"model", "n", "m"}, "ba region");
    return BarabasiAlbertModel{j.at("n").get<std::size_t>(), j.at("m").get<std::size_t>()};
  }
  if (kind == "pl") {
    check_keys(j, {"model", "n", "m", "p"}, "pl region");
    return PowerLawClusterModel{j.at("n").get<std::size_t>(), j.at("m").get<std::size_t>(), j.at("p").get<double>()};
  }
  if (kind == "file") {
    check_keys(j, {"model", "path", "direction"}, "file region");
    EdgeFileModel f{j.at("path").get<std::string>(), false};
    std::string dir = j.value("direction", "union");
    if (dir == "mutual") f.mutual_only = true;
    else if (dir != "union") throw InvalidArgument("direction must be \"union\" or \"mutual\"");
    return f;
  }
  throw InvalidArgument("unknown region model \"" + kind + "\" (expected ba, pl or file)");
}

json attack_to_json(const AttackConfig& cfg) {
  return {{"edges_per_sybil", cfg.edges_per_sybil},
          {"p_targeted", cfg.p_targeted},
          {"pdf", cfg.hit_distance_pdf},
          {"targets", cfg.honest_targets == TargetSet::KnownHonest ? "known" : "all"}};
}

AttackConfig attack_from_json(const json& j) {
  check_keys(j, {"edges_per_sybil", "p_targeted", "pdf", "targets"}, "attack");
  AttackConfig cfg;
  read_opt(j, "edges_per_sybil", cfg.edges_per_sybil);
  read_opt(j, "p_targeted", cfg.p_targeted);
  read_opt(j, "pdf", cfg.hit_distance_pdf);
  std::string targets = j.value("targets", "known");
  if (targets == "all") cfg.honest_targets = TargetSet::AllHonest;
  else if (targets != "known") throw InvalidArgument("attack targets must be \"known\" or \"all\"");
  cfg.validate();
  return cfg;
}

json synth_to_json(const SynthSpec& spec) {
  return {{"honest", region_to_json(spec.honest)},
          {"sybil", region_to_json(spec.sybil)},
          {"attack", attack_to_json(spec.attack)},
          {"train_fraction", spec.train_fraction},
          {"seed", spec.seed}};
}

SynthSpec synth_from_json(const json& j) {
  check_keys(j, {"honest", "sybil", "attack", "train_fraction", "seed"}, "network spec");
  SynthSpec spec;
  spec.honest = region_from_json(j.at("honest"));
  spec.sybil = region_from_json(j.at("sybil"));
  if (j.contains("attack")) spec.attack = attack_from_json(j.at("attack"));
  read_opt(j, "train_fraction", spec.train_fraction);
  read_opt(j, "seed", spec.seed);
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
    throw InvalidArgument("train_fraction must lie in (0, 1)");
  }
  return spec;
}

json hyper_to_json(const GatHyper& h) {
  return {{"input_width", h.input_width},
          {"hidden_width", h.hidden_width},
          {"output_width", h.output_width},
          {"heads", h.heads},
          {"layers", h.layers},
          {"dropout", h.dropout},
          {"leaky_slope", h.leaky_slope},
          {"learning_rate", h.learning_rate},
          {"beta1", h.beta1},
          {"beta2", h.beta2},
          {"epsilon", h.epsilon},
          {"max_epochs", h.max_epochs},
          {"patience", h.patience},
          {"train_val_split", h.train_val_split},
          {"inference_split", h.inference_split},
          {"seed", h.seed}};
}

GatHyper hyper_from_json(const json& j, const GatHyper& base) {
  check_keys(j,
             {"input_width", "hidden_width", "output_width", "heads", "layers", "dropout", "leaky_slope",
              "learning_rate", "beta1", "beta2", "epsilon", "max_epochs", "patience", "train_val_split",
              "inference_split", "seed"},
             "gat hyperparameters");
  GatHyper h = base;
  read_opt(j, "input_width", h.input_width);
  read_opt(j, "hidden_width", h.hidden_width);
  read_opt(j, "output_width", h.output_width);
  read_opt(j, "heads", h.heads);
  read_opt(j, "layers", h.layers);
  read_opt(j, "dropout", h.dropout);
  read_opt(j, "leaky_slope", h.leaky_slope);
  read_opt(j, "learning_rate", h.learning_rate);
  read_opt(j, "beta1", h.beta1);
  read_opt(j, "beta2", h.beta2);
  read_opt(j, "epsilon", h.epsilon);
  read_opt(j, "max_epochs", h.max_epochs);
  read_opt(j, "patience", h.patience);
  read_opt(j, "train_val_split", h.train_val_split);
  read_opt(j, "inference_split", h.inference_split);
  read_opt(j, "seed", h.seed);
  h.validate();
  return h;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

void write_json_file(const json& j, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

void resolve_region_paths(SynthSpec& spec, const std::filesystem::path& base_dir) {
  for (RegionModel* r : {&spec.honest, &spec.sybil}) {
    if (auto* f = std::get_if<EdgeFileModel>(r)) {
      std::filesystem::path p(f->path);
      if (p.is_relative()) f->path = (base_dir / p).string();
    }
  }
}

}  // namespace sybillab
