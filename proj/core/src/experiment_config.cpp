#include "lecam/experiment_config.hpp"

#include <cctype>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "lecam/text_io.hpp"

namespace lecam {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

[[noreturn]] void fail(const std::string& message) {
  throw std::runtime_error("config: " + message);
}

class KeyTable {
 public:
  void insert(const std::string& section, const std::string& key,
              const std::string& value) {
    const std::string full = section + "." + key;
    if (!values_.emplace(full, value).second) {
      fail("duplicate key '" + full + "'");
    }
  }

  bool take_string(const std::string& full, std::string& out) {
    auto it = values_.find(full);
    if (it == values_.end()) return false;
    out = it->second;
    consumed_.insert(full);
    return true;
  }

  template <typename Parse>
  void take(const std::string& full, Parse&& parse) {
    std::string raw;
    if (take_string(full, raw)) parse(raw);
  }

  void reject_unconsumed() const {
    for (const auto& [key, value] : values_) {
      if (!consumed_.count(key)) fail("unknown key '" + key + "'");
    }
  }

 private:
  std::map<std::string, std::string> values_;
  std::set<std::string> consumed_;
};

double to_real(const std::string& full, const std::string& raw) {
  double v;
  if (!parse_double(raw, v) || !std::isfinite(v)) {
    fail("key '" + full + "': '" + raw + "' is not a finite number");
  }
  return v;
}

std::uint64_t to_unsigned(const std::string& full, const std::string& raw) {
  // stoull silently wraps negative input, so reject it up front.
  if (raw.empty() || raw[0] == '-') {
    fail("key '" + full + "': '" + raw + "' is not a nonnegative integer");
  }
  try {
    std::size_t pos = 0;
    const unsigned long long v = std::stoull(raw, &pos);
    if (pos != raw.size()) throw std::invalid_argument(raw);
    return v;
  } catch (const std::exception&) {
    fail("key '" + full + "': '" + raw + "' is not a nonnegative integer");
  }
}

bool to_bool(const std::string& full, const std::string& raw) {
  if (raw == "true" || raw == "1") return true;
  if (raw == "false" || raw == "0") return false;
  fail("key '" + full + "': '" + raw + "' is not a boolean");
}

const char* bool_str(bool v) { return v ? "true" : "false"; }

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& text) {
  static const std::set<std::string> kSections = {"dataset", "model", "train",
                                                  "output"};
  KeyTable table;
  std::istringstream in(text);
  std::string line, section;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (t.front() == '[') {
      if (t.back() != ']') fail("line " + std::to_string(line_no) + ": bad section header");
      section = trim(t.substr(1, t.size() - 2));
      if (!kSections.count(section)) fail("unknown section '" + section + "'");
      continue;
    }
    const std::size_t eq = t.find('=');
    if (eq == std::string::npos) {
      fail("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    if (section.empty()) {
      fail("line " + std::to_string(line_no) + ": key outside any section");
    }
    table.insert(section, trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }

  ExperimentConfig cfg;
  DatasetConfig& ds = cfg.dataset;
  bool std_given = false;

  table.take("dataset.type", [&](const std::string& v) {
    if (v != "ring8" && v != "grid25" && v != "csv") {
      fail("key 'dataset.type': unknown type '" + v + "'");
    }
    ds.type = v;
  });
  table.take("dataset.n", [&](const std::string& v) { ds.n = to_unsigned("dataset.n", v); });
  table.take("dataset.modes", [&](const std::string& v) { ds.modes = to_unsigned("dataset.modes", v); });
  table.take("dataset.radius", [&](const std::string& v) { ds.radius = to_real("dataset.radius", v); });
  table.take("dataset.std", [&](const std::string& v) {
    ds.stddev = to_real("dataset.std", v);
    std_given = true;
  });
  table.take("dataset.spacing", [&](const std::string& v) { ds.spacing = to_real("dataset.spacing", v); });
  table.take("dataset.side", [&](const std::string& v) { ds.side = to_unsigned("dataset.side", v); });
  table.take("dataset.fraction", [&](const std::string& v) { ds.fraction = to_real("dataset.fraction", v); });
  table.take("dataset.count", [&](const std::string& v) { ds.count = to_unsigned("dataset.count", v); });
  table.take("dataset.seed", [&](const std::string& v) { ds.seed = to_unsigned("dataset.seed", v); });
  table.take("dataset.csv_path", [&](const std::string& v) { ds.csv_path = v; });
  if (!std_given && ds.type == "grid25") ds.stddev = 0.02;

  TrainConfig& tr = cfg.train;
  table.take("model.g_hidden", [&](const std::string& v) { tr.g_hidden = to_unsigned("model.g_hidden", v); });
  table.take("model.d_hidden", [&](const std::string& v) { tr.d_hidden = to_unsigned("model.d_hidden", v); });
  table.take("model.z_dim", [&](const std::string& v) { tr.z_dim = to_unsigned("model.z_dim", v); });

  table.take("train.loss", [&](const std::string& v) {
    tr.loss.family = loss_family_from_string(v);
  });
  table.take("train.lambda", [&](const std::string& v) {
    tr.loss.lambda = to_real("train.lambda", v);
    if (tr.loss.lambda < 0.0) fail("key 'train.lambda': must be >= 0");
  });
  table.take("train.gamma", [&](const std::string& v) { tr.gamma = to_real("train.gamma", v); });
  table.take("train.anneal_gamma", [&](const std::string& v) { tr.anneal_gamma = to_bool("train.anneal_gamma", v); });
  table.take("train.d_steps", [&](const std::string& v) {
    const std::uint64_t steps = to_unsigned("train.d_steps", v);
    if (steps > 1000000) fail("key 'train.d_steps': implausibly large");
    tr.d_steps_per_g = static_cast<int>(steps);
  });
  table.take("train.batch", [&](const std::string& v) { tr.batch = to_unsigned("train.batch", v); });
  table.take("train.lr_g", [&](const std::string& v) { tr.lr_g = to_real("train.lr_g", v); });
  table.take("train.lr_d", [&](const std::string& v) { tr.lr_d = to_real("train.lr_d", v); });
  table.take("train.total_g_steps", [&](const std::string& v) { tr.total_g_steps = to_unsigned("train.total_g_steps", v); });
  table.take("train.eval_every", [&](const std::string& v) { tr.eval_every = to_unsigned("train.eval_every", v); });
  table.take("train.seed", [&](const std::string& v) { tr.seed = to_unsigned("train.seed", v); });
  table.take("train.reg_real", [&](const std::string& v) { tr.loss.reg_real = to_bool("train.reg_real", v); });
  table.take("train.reg_fake", [&](const std::string& v) { tr.loss.reg_fake = to_bool("train.reg_fake", v); });
  table.take("train.single_anchor", [&](const std::string& v) { tr.loss.single_anchor = to_bool("train.single_anchor", v); });
  table.take("train.anchor_mode", [&](const std::string& v) { tr.anchor_mode = anchor_mode_from_string(v); });
  table.take("train.anchor_const_r", [&](const std::string& v) { tr.anchor_const_r = to_real("train.anchor_const_r", v); });
  table.take("train.anchor_const_f", [&](const std::string& v) { tr.anchor_const_f = to_real("train.anchor_const_f", v); });
  table.take("train.eval_sample", [&](const std::string& v) { tr.eval_sample = to_unsigned("train.eval_sample", v); });

  table.take("output.dir", [&](const std::string& v) { cfg.output.dir = v; });

  table.reject_unconsumed();

  if (ds.type == "csv" && ds.csv_path.empty()) {
    fail("key 'dataset.csv_path': required when dataset.type = csv");
  }
  try {
    validate(cfg.train);
  } catch (const std::invalid_argument& e) {
    fail(e.what());
  }
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  return parse_experiment_config(read_file(path));
}

namespace {

void serialize_body(const ExperimentConfig& cfg, std::ostringstream& out,
                    bool include_output) {
  const DatasetConfig& ds = cfg.dataset;
  out << "[dataset]\n";
  out << "type = " << ds.type << "\n";
  out << "n = " << ds.n << "\n";
  out << "modes = " << ds.modes << "\n";
  out << "radius = " << format_double(ds.radius) << "\n";
  out << "std = " << format_double(ds.stddev) << "\n";
  out << "spacing = " << format_double(ds.spacing) << "\n";
  out << "side = " << ds.side << "\n";
  out << "fraction = " << format_double(ds.fraction) << "\n";
  out << "count = " << ds.count << "\n";
  out << "seed = " << ds.seed << "\n";
  out << "csv_path = " << ds.csv_path << "\n";

  const TrainConfig& tr = cfg.train;
  out << "\n[model]\n";
  out << "g_hidden = " << tr.g_hidden << "\n";
  out << "d_hidden = " << tr.d_hidden << "\n";
  out << "z_dim = " << tr.z_dim << "\n";

  out << "\n[train]\n";
  out << "loss = " << to_string(tr.loss.family) << "\n";
  out << "lambda = " << format_double(tr.loss.lambda) << "\n";
  out << "gamma = " << format_double(tr.gamma) << "\n";
  out << "anneal_gamma = " << bool_str(tr.anneal_gamma) << "\n";
  out << "d_steps = " << tr.d_steps_per_g << "\n";
  out << "batch = " << tr.batch << "\n";
  out << "lr_g = " << format_double(tr.lr_g) << "\n";
  out << "lr_d = " << format_double(tr.lr_d) << "\n";
  out << "total_g_steps = " << tr.total_g_steps << "\n";
  out << "eval_every = " << tr.eval_every << "\n";
  out << "seed = " << tr.seed << "\n";
  out << "reg_real = " << bool_str(tr.loss.reg_real) << "\n";
  out << "reg_fake = " << bool_str(tr.loss.reg_fake) << "\n";
  out << "single_anchor = " << bool_str(tr.loss.single_anchor) << "\n";
  out << "anchor_mode = " << to_string(tr.anchor_mode) << "\n";
  out << "anchor_const_r = " << format_double(tr.anchor_const_r) << "\n";
  out << "anchor_const_f = " << format_double(tr.anchor_const_f) << "\n";
  out << "eval_sample = " << tr.eval_sample << "\n";

  if (include_output) {
    out << "\n[output]\n";
    out << "dir = " << cfg.output.dir << "\n";
  }
}

}  // namespace

std::string serialize(const ExperimentConfig& cfg) {
  std::ostringstream out;
  serialize_body(cfg, out, true);
  return out.str();
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
  std::ostringstream out;
  serialize_body(cfg, out, false);
  return fnv1a64(out.str());
}

std::string run_dir_name(const ExperimentConfig& cfg) {
  return "run_" + hex16(config_hash(cfg)) + "_s" +
         std::to_string(cfg.train.seed);
}

Dataset2D build_dataset(const DatasetConfig& cfg) {
  Dataset2D base;
  if (cfg.type == "ring8") {
    base = make_ring(cfg.n, cfg.modes, cfg.radius, cfg.stddev, cfg.seed);
  } else if (cfg.type == "grid25") {
    base = make_grid(cfg.n, cfg.side, cfg.spacing, cfg.stddev, cfg.seed);
  } else if (cfg.type == "csv") {
    base = load_csv(cfg.csv_path);
  } else {
    fail("unknown dataset type '" + cfg.type + "'");
  }
  if (cfg.count == 0 && cfg.fraction >= 1.0) return base;
  SubsampleSpec spec;
  spec.fraction = cfg.fraction;
  if (cfg.count > 0) spec.count = cfg.count;
  spec.seed = cfg.seed;
  return subsample(base, spec);
}

}  // namespace lecam
