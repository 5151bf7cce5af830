#include "msfct/config.hpp"

#include <cctype>
#include <cstdlib>
#include <set>

#include "msfct/io.hpp"

namespace msfct {

namespace {

std::string trim(const std::string& s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

[[noreturn]] void fail(int line, const std::string& msg) {
  throw ConfigError("config line " + std::to_string(line) + ": " + msg);
}

bool valid_bare_key(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-' && c != '.')
      return false;
  return true;
}

// Parses one scalar or array starting at s[pos]; advances pos past it.
ConfigValue parse_value(const std::string& s, size_t& pos, int line) {
  while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  if (pos >= s.size()) fail(line, "missing value");
  ConfigValue v;
  v.line = line;
  const char c = s[pos];
  if (c == '"') {
    v.kind = ConfigValue::Kind::String;
    ++pos;
    while (pos < s.size() && s[pos] != '"') {
      if (s[pos] == '\\') {
        ++pos;
        if (pos >= s.size()) fail(line, "dangling escape in string");
        switch (s[pos]) {
          case 'n': v.str.push_back('\n'); break;
          case 't': v.str.push_back('\t'); break;
          case '"': v.str.push_back('"'); break;
          case '\\': v.str.push_back('\\'); break;
          default: fail(line, "unsupported escape in string");
        }
      } else {
        v.str.push_back(s[pos]);
      }
      ++pos;
    }
    if (pos >= s.size()) fail(line, "unterminated string");
    ++pos;  // closing quote
    return v;
  }
  if (c == '[') {
    v.kind = ConfigValue::Kind::Array;
    ++pos;
    bool expect_value = true;
    while (true) {
      while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
      if (pos >= s.size()) fail(line, "unterminated array");
      if (s[pos] == ']') {
        if (expect_value && !v.array.empty()) fail(line, "trailing comma in array");
        ++pos;
        return v;
      }
      if (!expect_value) {
        if (s[pos] != ',') fail(line, "expected ',' or ']' in array");
        ++pos;
        expect_value = true;
        continue;
      }
      ConfigValue elem = parse_value(s, pos, line);
      if (elem.kind == ConfigValue::Kind::Array) fail(line, "nested arrays unsupported");
      v.array.push_back(std::move(elem));
      expect_value = false;
    }
  }
  // bare token: bool or number
  size_t end = pos;
  while (end < s.size() && s[end] != ',' && s[end] != ']' && s[end] != '#' &&
         !std::isspace(static_cast<unsigned char>(s[end])))
    ++end;
  const std::string tok = s.substr(pos, end - pos);
  pos = end;
  if (tok == "true" || tok == "false") {
    v.kind = ConfigValue::Kind::Bool;
    v.boolean = tok == "true";
    return v;
  }
  char* parse_end = nullptr;
  std::strtod(tok.c_str(), &parse_end);
  if (parse_end == nullptr || *parse_end != '\0' || tok.empty())
    fail(line, "cannot parse value '" + tok + "'");
  v.kind = ConfigValue::Kind::Number;
  v.str = tok;
  return v;
}

// Strips a trailing comment that is not inside a quoted string.
std::string strip_comment(const std::string& s) {
  bool in_string = false;
  for (size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"' && (i == 0 || s[i - 1] != '\\')) in_string = !in_string;
    if (s[i] == '#' && !in_string) return s.substr(0, i);
  }
  return s;
}

}  // namespace

ConfigTable parse_config_text(const std::string& text) {
  ConfigTable table;
  std::string section;
  int line_no = 0;
  size_t start = 0;
  while (start <= text.size()) {
    size_t eol = text.find('\n', start);
    if (eol == std::string::npos) eol = text.size();
    std::string line = text.substr(start, eol - start);
    start = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    line = trim(strip_comment(line));
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') fail(line_no, "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (!valid_bare_key(section)) fail(line_no, "bad section name '" + section + "'");
      continue;
    }

    const size_t eq = line.find('=');
    if (eq == std::string::npos) fail(line_no, "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (!valid_bare_key(key) || key.find('.') != std::string::npos)
      fail(line_no, "bad key '" + key + "'");
    size_t pos = eq + 1;
    ConfigValue v = parse_value(line, pos, line_no);
    while (pos < line.size() && std::isspace(static_cast<unsigned char>(line[pos]))) ++pos;
    if (pos < line.size()) fail(line_no, "trailing characters after value");

    const std::string full = section.empty() ? key : section + "." + key;
    if (table.count(full)) fail(line_no, "duplicate key '" + full + "'");
    table.emplace(full, std::move(v));
  }
  return table;
}

namespace {

// Typed accessors that track which keys were consumed so leftovers can be
// rejected as unknown.
class Reader {
 public:
  explicit Reader(ConfigTable t) : table_(std::move(t)) {}

  bool has(const std::string& key) const { return table_.count(key) > 0; }

  const ConfigValue* take(const std::string& key) {
    auto it = table_.find(key);
    if (it == table_.end()) return nullptr;
    used_.insert(key);
    return &it->second;
  }

  std::string str(const std::string& key, const std::string& fallback) {
    const ConfigValue* v = take(key);
    if (!v) return fallback;
    if (v->kind != ConfigValue::Kind::String)
      throw ConfigError("config key '" + key + "': expected a string");
    return v->str;
  }

  bool boolean(const std::string& key, bool fallback) {
    const ConfigValue* v = take(key);
    if (!v) return fallback;
    if (v->kind != ConfigValue::Kind::Bool)
      throw ConfigError("config key '" + key + "': expected true or false");
    return v->boolean;
  }

  double number(const std::string& key, double fallback) {
    const ConfigValue* v = take(key);
    if (!v) return fallback;
    return to_double(*v, key);
  }

  long long integer(const std::string& key, long long fallback) {
    const ConfigValue* v = take(key);
    if (!v) return fallback;
    return to_integer(*v, key);
  }

  std::uint64_t u64(const std::string& key, std::uint64_t fallback) {
    const ConfigValue* v = take(key);
    if (!v) return fallback;
    if (v->kind != ConfigValue::Kind::Number)
      throw ConfigError("config key '" + key + "': expected an integer");
    errno = 0;
    char* end = nullptr;
    const std::uint64_t r = std::strtoull(v->str.c_str(), &end, 10);
    if (errno != 0 || end == nullptr || *end != '\0')
      throw ConfigError("config key '" + key + "': expected a nonnegative integer");
    return r;
  }

  std::vector<double> number_list(const std::string& key) {
    const ConfigValue* v = take(key);
    if (!v) return {};
    if (v->kind != ConfigValue::Kind::Array)
      throw ConfigError("config key '" + key + "': expected an array");
    std::vector<double> out;
    for (const auto& e : v->array) out.push_back(to_double(e, key));
    return out;
  }

  std::vector<std::string> string_list(const std::string& key) {
    const ConfigValue* v = take(key);
    if (!v) return {};
    if (v->kind != ConfigValue::Kind::Array)
      throw ConfigError("config key '" + key + "': expected an array");
    std::vector<std::string> out;
    for (const auto& e : v->array) {
      if (e.kind != ConfigValue::Kind::String)
        throw ConfigError("config key '" + key + "': expected string elements");
      out.push_back(e.str);
    }
    return out;
  }

  void reject_unknown() const {
    for (const auto& [key, value] : table_)
      if (!used_.count(key))
        throw ConfigError("unknown config key '" + key + "' (line " +
                          std::to_string(value.line) + ")");
  }

 private:
  static double to_double(const ConfigValue& v, const std::string& key) {
    if (v.kind != ConfigValue::Kind::Number)
      throw ConfigError("config key '" + key + "': expected a number");
    char* end = nullptr;
    const double d = std::strtod(v.str.c_str(), &end);
    if (end == nullptr || *end != '\0')
      throw ConfigError("config key '" + key + "': expected a number");
    return d;
  }

  static long long to_integer(const ConfigValue& v, const std::string& key) {
    if (v.kind != ConfigValue::Kind::Number)
      throw ConfigError("config key '" + key + "': expected an integer");
    errno = 0;
    char* end = nullptr;
    const long long r = std::strtoll(v.str.c_str(), &end, 10);
    if (errno != 0 || end == nullptr || *end != '\0')
      throw ConfigError("config key '" + key + "': expected an integer");
    return r;
  }

  ConfigTable table_;
  std::set<std::string> used_;
};

BlockMatchConfig read_block_match(Reader& r, const std::string& section,
                                  BlockMatchConfig defaults) {
  BlockMatchConfig c = defaults;
  c.patch_size = r.integer(section + ".patch_size", c.patch_size);
  c.search_radius = r.integer(section + ".search_radius", c.search_radius);
  c.max_group_size = r.integer(section + ".max_group_size", c.max_group_size);
  c.step = r.integer(section + ".step", c.step);
  c.hard_threshold_lambda = r.number(section + ".lambda", c.hard_threshold_lambda);
  c.match_threshold = r.number(section + ".match_threshold", c.match_threshold);
  const std::string stage = r.str(
      section + ".stage",
      c.stage == BlockMatchConfig::Stage::HardOnly ? "hard" : "hard+wiener");
  if (stage == "hard")
    c.stage = BlockMatchConfig::Stage::HardOnly;
  else if (stage == "hard+wiener")
    c.stage = BlockMatchConfig::Stage::HardWiener;
  else
    throw ConfigError("config key '" + section + ".stage': must be hard or hard+wiener");
  return c;
}

}  // namespace

ExperimentConfig experiment_config_from_text(const std::string& text) {
  Reader r(parse_config_text(text));
  ExperimentConfig cfg;

  cfg.seed = r.u64("run.seed", cfg.seed);
  cfg.threads = static_cast<int>(r.integer("run.threads", cfg.threads));
  cfg.output_dir = r.str("run.output_dir", cfg.output_dir);
  if (r.has("run.methods")) cfg.methods = r.string_list("run.methods");
  cfg.write_volumes = r.boolean("run.write_volumes", cfg.write_volumes);
  cfg.write_png = r.boolean("run.write_png", cfg.write_png);

  cfg.phantom.kind = phantom_kind_from_string(
      r.str("phantom.kind", phantom_kind_name(cfg.phantom.kind)));
  cfg.phantom.nx = r.integer("phantom.nx", cfg.phantom.nx);
  cfg.phantom.ny = r.integer("phantom.ny", cfg.phantom.ny);
  cfg.phantom.nz = r.integer("phantom.nz", cfg.phantom.nz);
  cfg.phantom.spacing_xy = r.number("phantom.spacing_xy", cfg.phantom.spacing_xy);
  cfg.phantom.spacing_z = r.number("phantom.spacing_z", cfg.phantom.spacing_z);
  cfg.phantom.value = r.number("phantom.value", cfg.phantom.value);
  cfg.phantom.seed = cfg.seed;  // one seed drives all randomness

  cfg.n_views = r.integer("geometry.n_views", cfg.n_views);
  cfg.n_channels = r.integer("geometry.n_channels", cfg.n_channels);
  cfg.channel_spacing = r.number("geometry.channel_spacing", cfg.channel_spacing);
  cfg.center_offset = r.number("geometry.center_offset", cfg.center_offset);

  cfg.synth.view_subsample =
      r.integer("synthesize.view_subsample", cfg.synth.view_subsample);
  cfg.synth.slice_subsample =
      r.integer("synthesize.slice_subsample", cfg.synth.slice_subsample);
  cfg.synth.noise_percent = r.number("synthesize.noise_percent", cfg.synth.noise_percent);
  cfg.synth.weights = weight_model_from_string(
      r.str("synthesize.weights", weight_model_name(cfg.synth.weights)));
  cfg.synth.seed = cfg.seed;

  const std::string norm = r.str("metrics.nrmse_norm", "estimate");
  if (norm == "estimate")
    cfg.nrmse_norm = NrmseNorm::Estimate;
  else if (norm == "truth")
    cfg.nrmse_norm = NrmseNorm::Truth;
  else
    throw ConfigError("config key 'metrics.nrmse_norm': must be estimate or truth");

  const std::string filt = r.str("fbp.filter", filter_kind_name(cfg.filter.kind));
  cfg.filter.kind = filter_kind_from_string(filt);
  cfg.filter.cutoff = r.number("fbp.cutoff", cfg.filter.cutoff);

  cfg.mbir.mrf.beta = r.number("mbir.beta", cfg.mbir.mrf.beta);
  cfg.mbir.mrf.neighborhood =
      static_cast<int>(r.integer("mbir.neighborhood", cfg.mbir.mrf.neighborhood));
  cfg.mbir.cg.tol = r.number("mbir.cg_tol", cfg.mbir.cg.tol);
  cfg.mbir.cg.max_iter = r.integer("mbir.cg_max_iter", cfg.mbir.cg.max_iter);

  cfg.pnp.rho = r.number("pnp.rho", cfg.pnp.rho);
  cfg.pnp.stop_frac = r.number("pnp.stop_frac", cfg.pnp.stop_frac);
  cfg.pnp.max_iter = r.integer("pnp.max_iter", cfg.pnp.max_iter);
  const std::string rule = r.str(
      "pnp.stop_rule", cfg.pnp.stop_rule == PnpConfig::StopRule::Both ? "both" : "either");
  if (rule == "both")
    cfg.pnp.stop_rule = PnpConfig::StopRule::Both;
  else if (rule == "either")
    cfg.pnp.stop_rule = PnpConfig::StopRule::Either;
  else
    throw ConfigError("config key 'pnp.stop_rule': must be both or either");
  cfg.pnp_init = r.str("pnp.init", cfg.pnp_init);
  cfg.prox_cg.tol = r.number("pnp.cg_tol", cfg.prox_cg.tol);
  cfg.prox_cg.max_iter = r.integer("pnp.cg_max_iter", cfg.prox_cg.max_iter);

  cfg.msf_sigmas.xy = r.number("msf.sigma_xy", cfg.msf_sigmas.xy);
  cfg.msf_sigmas.yz = r.number("msf.sigma_yz", cfg.msf_sigmas.yz);
  cfg.msf_sigmas.xz = r.number("msf.sigma_xz", cfg.msf_sigmas.xz);
  cfg.bm_plane = read_block_match(r, "msf", cfg.bm_plane);

  cfg.bm4d_sigma = r.number("bm4d.sigma", cfg.bm4d_sigma);
  cfg.bm_cube = read_block_match(r, "bm4d", cfg.bm_cube);

  cfg.tune_method = r.str("tune.method", cfg.tune_method);
  const std::string metric = r.str(
      "tune.metric", cfg.tune_metric == TuneMetric::Psnr ? "psnr" : "nrmse");
  if (metric == "psnr")
    cfg.tune_metric = TuneMetric::Psnr;
  else if (metric == "nrmse")
    cfg.tune_metric = TuneMetric::Nrmse;
  else
    throw ConfigError("config key 'tune.metric': must be psnr or nrmse");
  cfg.tune_xy = r.number_list("tune.xy");
  cfg.tune_yz = r.number_list("tune.yz");
  cfg.tune_xz = r.number_list("tune.xz");
  cfg.tune_bm4d = r.number_list("tune.bm4d");

  r.reject_unknown();
  cfg.validate();
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  return experiment_config_from_text(read_text_file(path));
}

}  // namespace msfct
