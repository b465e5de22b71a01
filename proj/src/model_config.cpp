#include "stamp/model_config.hpp"

#include "stamp/errors.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace stamp {

void ModelConfig::validate() const {
  if (any_extended() && !(use_ta && use_jump && use_step))
    throw InvalidConfig("extended team-level slopes require use_ta, use_jump, use_step");
  if (u_sd <= 0.0 || u_slope <= 0.0)
    throw InvalidConfig("prior scales must be positive");
  if (alpha_prec <= 0.0 || alpha_prec >= 1.0 || alpha_cor <= 0.0 || alpha_cor >= 1.0)
    throw InvalidConfig("tail probabilities must lie in (0, 1)");
  if (v_cor <= 0.0 || v_cor >= 1.0)
    throw InvalidConfig("correlation threshold must lie in (0, 1)");
  if (fixed_effect_sd <= 0.0 || ridge_sd <= 0.0)
    throw InvalidConfig("fixed-effect and ridge scales must be positive");
}

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

} // namespace

std::string ModelConfig::to_kv() const {
  std::ostringstream out;
  out << "use_ta=" << (use_ta ? 1 : 0) << '\n'
      << "use_ts=" << (use_ts ? 1 : 0) << '\n'
      << "use_jump=" << (use_jump ? 1 : 0) << '\n'
      << "use_step=" << (use_step ? 1 : 0) << '\n'
      << "use_lay=" << (use_lay ? 1 : 0) << '\n'
      << "use_float=" << (use_float ? 1 : 0) << '\n'
      << "use_rim=" << (use_rim ? 1 : 0) << '\n'
      << "use_fade=" << (use_fade ? 1 : 0) << '\n'
      << "U_sd=" << fmt_double(u_sd) << '\n'
      << "U_slope=" << fmt_double(u_slope) << '\n'
      << "alpha_prec=" << fmt_double(alpha_prec) << '\n'
      << "V_cor=" << fmt_double(v_cor) << '\n'
      << "alpha_cor=" << fmt_double(alpha_cor) << '\n'
      << "fixed_effect_sd=" << fmt_double(fixed_effect_sd) << '\n'
      << "ridge_sd=" << fmt_double(ridge_sd) << '\n'
      << "strict_w_constraints=" << (strict_w_constraints ? 1 : 0) << '\n';
  return out.str();
}

ModelConfig ModelConfig::from_kv(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#')
      continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError("config line missing '=': " + line);
    std::string key = line.substr(0, eq);
    std::string val = line.substr(eq + 1);
    if (!val.empty() && val.back() == '\r')
      val.pop_back();
    kv[key] = val;
  }
  ModelConfig cfg;
  auto get_bool = [&kv](const char* key, bool& dst) {
    auto it = kv.find(key);
    if (it != kv.end())
      dst = it->second != "0";
  };
  auto get_double = [&kv](const char* key, double& dst) {
    auto it = kv.find(key);
    if (it != kv.end())
      dst = std::stod(it->second);
  };
  get_bool("use_ta", cfg.use_ta);
  get_bool("use_ts", cfg.use_ts);
  get_bool("use_jump", cfg.use_jump);
  get_bool("use_step", cfg.use_step);
  get_bool("use_lay", cfg.use_lay);
  get_bool("use_float", cfg.use_float);
  get_bool("use_rim", cfg.use_rim);
  get_bool("use_fade", cfg.use_fade);
  get_double("U_sd", cfg.u_sd);
  get_double("U_slope", cfg.u_slope);
  get_double("alpha_prec", cfg.alpha_prec);
  get_double("V_cor", cfg.v_cor);
  get_double("alpha_cor", cfg.alpha_cor);
  get_double("fixed_effect_sd", cfg.fixed_effect_sd);
  get_double("ridge_sd", cfg.ridge_sd);
  get_bool("strict_w_constraints", cfg.strict_w_constraints);
  cfg.validate();
  return cfg;
}

ModelConfig ModelConfig::from_kv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw ParseError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_kv(ss.str());
}

void ModelConfig::write_kv_file(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw ParseError("cannot open for writing: " + path);
  out << to_kv();
}

std::string ModelConfig::flag_summary() const {
  std::ostringstream out;
  out << "ta=" << use_ta << " ts=" << use_ts << " jump=" << use_jump
      << " step=" << use_step;
  if (any_extended())
    out << " lay=" << use_lay << " float=" << use_float << " rim=" << use_rim
        << " fade=" << use_fade;
  return out.str();
}

std::vector<ModelConfig> enumerate_core_configs(double u_sd, double u_slope) {
  std::vector<ModelConfig> out;
  for (int ta = 0; ta <= 1; ++ta)
    for (int ts = 0; ts <= 1; ++ts)
      for (int jump = 0; jump <= 1; ++jump)
        for (int step = 0; step <= 1; ++step) {
          ModelConfig cfg;
          cfg.use_ta = ta;
          cfg.use_ts = ts;
          cfg.use_jump = jump;
          cfg.use_step = step;
          cfg.u_sd = u_sd;
          cfg.u_slope = u_slope;
          out.push_back(cfg);
        }
  return out;
}

std::vector<ModelConfig> enumerate_extended_configs(double u_sd, double u_slope) {
  std::vector<ModelConfig> out;
  for (int ts = 0; ts <= 1; ++ts)
    for (int lay = 0; lay <= 1; ++lay)
      for (int flo = 0; flo <= 1; ++flo)
        for (int rim = 0; rim <= 1; ++rim)
          for (int fade = 0; fade <= 1; ++fade) {
            ModelConfig cfg;
            cfg.use_ta = true;
            cfg.use_jump = true;
            cfg.use_step = true;
            cfg.use_ts = ts;
            cfg.use_lay = lay;
            cfg.use_float = flo;
            cfg.use_rim = rim;
            cfg.use_fade = fade;
            cfg.u_sd = u_sd;
            cfg.u_slope = u_slope;
            out.push_back(cfg);
          }
  return out;
}

} // namespace stamp
