#include "tsseg/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace tsseg {

Smoothing parse_smoothing(const std::string& s) {
  if (s == "none") return Smoothing::none;
  if (s == "segmental") return Smoothing::segmental;
  if (s == "tmse") return Smoothing::tmse;
  throw InvalidInput("smoothing must be none, segmental or tmse (got \"" + s + "\")");
}

const char* smoothing_name(Smoothing s) {
  switch (s) {
    case Smoothing::none: return "none";
    case Smoothing::segmental: return "segmental";
    case Smoothing::tmse: return "tmse";
  }
  return "?";
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& v) {
  T out{};
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end) throw InvalidInput("malformed number \"" + v + "\"");
  return out;
}

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw InvalidInput("malformed boolean \"" + v + "\"");
}

std::vector<std::size_t> parse_list(const std::string& v) {
  std::vector<std::size_t> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number<std::size_t>(trim(item)));
  if (out.empty()) throw InvalidInput("empty list");
  return out;
}

std::string fmt_double(double v) {
  // shortest text that parses back to the same double
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

struct Field {
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <typename Member>
Field size_field(Member m) {
  return {[m](RunConfig& c, const std::string& v) { std::invoke(m, c) = parse_number<std::size_t>(v); },
          [m](const RunConfig& c) { return std::to_string(std::invoke(m, const_cast<RunConfig&>(c))); }};
}

template <typename Member>
Field double_field(Member m) {
  return {[m](RunConfig& c, const std::string& v) { std::invoke(m, c) = parse_number<double>(v); },
          [m](const RunConfig& c) { return fmt_double(std::invoke(m, const_cast<RunConfig&>(c))); }};
}

template <typename Member>
Field bool_field(Member m) {
  return {[m](RunConfig& c, const std::string& v) { std::invoke(m, c) = parse_bool(v); },
          [m](const RunConfig& c) { return std::string(std::invoke(m, const_cast<RunConfig&>(c)) ? "true" : "false"); }};
}

template <typename Member>
Field u64_field(Member m) {
  return {[m](RunConfig& c, const std::string& v) { std::invoke(m, c) = parse_number<std::uint64_t>(v); },
          [m](const RunConfig& c) { return std::to_string(std::invoke(m, const_cast<RunConfig&>(c))); }};
}

// Keys in output order.
const std::vector<std::pair<std::string, Field>>& fields() {
  static const std::vector<std::pair<std::string, Field>> table = [] {
    std::vector<std::pair<std::string, Field>> t;
    // synthetic data
    t.emplace_back("num_classes", size_field([](RunConfig& c) -> auto& { return c.data.num_classes; }));
    t.emplace_back("feature_dim", size_field([](RunConfig& c) -> auto& { return c.data.feature_dim; }));
    t.emplace_back("num_videos", size_field([](RunConfig& c) -> auto& { return c.data.num_videos; }));
    t.emplace_back("num_test_videos", size_field([](RunConfig& c) -> auto& { return c.data.num_test_videos; }));
    t.emplace_back("min_segments", size_field([](RunConfig& c) -> auto& { return c.data.min_segments; }));
    t.emplace_back("max_segments", size_field([](RunConfig& c) -> auto& { return c.data.max_segments; }));
    t.emplace_back("min_segment_length", size_field([](RunConfig& c) -> auto& { return c.data.min_segment_length; }));
    t.emplace_back("max_segment_length", size_field([](RunConfig& c) -> auto& { return c.data.max_segment_length; }));
    t.emplace_back("prototype_separation", double_field([](RunConfig& c) -> auto& { return c.data.prototype_separation; }));
    t.emplace_back("noise_sigma", double_field([](RunConfig& c) -> auto& { return c.data.noise_sigma; }));
    t.emplace_back("smoothing_radius", size_field([](RunConfig& c) -> auto& { return c.data.smoothing_radius; }));
    t.emplace_back("center_biased_timestamps", bool_field([](RunConfig& c) -> auto& { return c.data.center_biased_timestamps; }));
    t.emplace_back("data_seed", u64_field([](RunConfig& c) -> auto& { return c.data.seed; }));
    // model
    t.emplace_back("channel_width", size_field([](RunConfig& c) -> auto& { return c.model.channel_width; }));
    t.emplace_back("num_stages", size_field([](RunConfig& c) -> auto& { return c.model.num_stages; }));
    t.emplace_back("first_stage_layers", size_field([](RunConfig& c) -> auto& { return c.model.first_stage_layers; }));
    t.emplace_back("later_stage_layers", size_field([](RunConfig& c) -> auto& { return c.model.later_stage_layers; }));
    t.emplace_back("first_stage_kernels",
                   Field{[](RunConfig& c, const std::string& v) { c.model.first_stage_kernels = parse_list(v); },
                         [](const RunConfig& c) {
                           std::string s;
                           for (std::size_t k : c.model.first_stage_kernels) {
                             if (!s.empty()) s += ",";
                             s += std::to_string(k);
                           }
                           return s;
                         }});
    // training
    t.emplace_back("total_epochs", size_field([](RunConfig& c) -> auto& { return c.train.total_epochs; }));
    t.emplace_back("warmup_epochs", size_field([](RunConfig& c) -> auto& { return c.train.warmup_epochs; }));
    t.emplace_back("learning_rate", double_field([](RunConfig& c) -> auto& { return c.train.learning_rate; }));
    t.emplace_back("lr_decay_factor", double_field([](RunConfig& c) -> auto& { return c.train.lr_decay_factor; }));
    t.emplace_back("lr_decay_every", size_field([](RunConfig& c) -> auto& { return c.train.lr_decay_every; }));
    t.emplace_back("adam_beta1", double_field([](RunConfig& c) -> auto& { return c.train.adam_beta1; }));
    t.emplace_back("adam_beta2", double_field([](RunConfig& c) -> auto& { return c.train.adam_beta2; }));
    t.emplace_back("adam_epsilon", double_field([](RunConfig& c) -> auto& { return c.train.adam_epsilon; }));
    t.emplace_back("lambda", double_field([](RunConfig& c) -> auto& { return c.train.lambda; }));
    t.emplace_back("alpha", double_field([](RunConfig& c) -> auto& { return c.train.alpha; }));
    t.emplace_back("tau", double_field([](RunConfig& c) -> auto& { return c.train.tau; }));
    t.emplace_back("tau_tmse", double_field([](RunConfig& c) -> auto& { return c.train.tau_tmse; }));
    t.emplace_back("beta_max", double_field([](RunConfig& c) -> auto& { return c.train.beta_max; }));
    t.emplace_back("seed", u64_field([](RunConfig& c) -> auto& { return c.train.seed; }));
    t.emplace_back("no_teacher", bool_field([](RunConfig& c) -> auto& { return c.train.no_teacher; }));
    t.emplace_back("smoothing",
                   Field{[](RunConfig& c, const std::string& v) { c.train.smoothing = parse_smoothing(v); },
                         [](const RunConfig& c) { return std::string(smoothing_name(c.train.smoothing)); }});
    t.emplace_back("supervision",
                   Field{[](RunConfig& c, const std::string& v) {
                           if (v == "timestamp") c.train.supervision = Supervision::timestamp;
                           else if (v == "full") c.train.supervision = Supervision::full;
                           else throw InvalidInput("supervision must be timestamp or full");
                         },
                         [](const RunConfig& c) {
                           return std::string(c.train.supervision == Supervision::full ? "full" : "timestamp");
                         }});
    t.emplace_back("export_pseudo_labels", bool_field([](RunConfig& c) -> auto& { return c.train.export_pseudo_labels; }));
    t.emplace_back("evaluate_teacher_on_train",
                   bool_field([](RunConfig& c) -> auto& { return c.train.evaluate_teacher_on_train; }));
    return t;
  }();
  return table;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::set<std::string> seen;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = "config line " + std::to_string(lineno) + ": ";
    if (eq == std::string::npos) throw InvalidInput(where + "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto& table = fields();
    auto it = std::find_if(table.begin(), table.end(), [&](const auto& f) { return f.first == key; });
    if (it == table.end()) throw InvalidInput(where + "unknown key \"" + key + "\"");
    if (!seen.insert(key).second) throw InvalidInput(where + "duplicate key \"" + key + "\"");
    try {
      it->second.set(cfg, value);
    } catch (const InvalidInput& e) {
      throw InvalidInput(where + key + ": " + e.what());
    }
  }
  cfg.data.validate();
  cfg.train.validate();
  cfg.model.feature_dim = cfg.data.feature_dim;
  cfg.model.num_classes = cfg.data.num_classes;
  cfg.model.validate();
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string format_config(const RunConfig& cfg) {
  std::string out;
  for (const auto& [key, field] : fields()) out += key + " = " + field.get(cfg) + "\n";
  return out;
}

}  // namespace tsseg
