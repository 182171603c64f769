#include "ksopt/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ksopt {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw std::invalid_argument("config: bad boolean value '" + v + "'");
}

}  // namespace

void apply_override(ExperimentConfig& cfg, const std::string& key,
                    const std::string& value) {
  try {
    if (key == "mode") cfg.mode = value;
    else if (key == "grid_p") cfg.grid_p = std::stol(value);
    else if (key == "grid_q") cfg.grid_q = std::stol(value);
    else if (key == "coils") cfg.coils = std::stol(value);
    else if (key == "accel") cfg.accel = std::stod(value);
    else if (key == "m_v") cfg.m_v = std::stol(value);
    else if (key == "m_h") cfg.m_h = std::stol(value);
    else if (key == "unroll_depth") cfg.unroll_depth = std::stol(value);
    else if (key == "arch") cfg.arch = value;
    else if (key == "strategy") cfg.strategy = value;
    else if (key == "sigma") cfg.sigma = std::stod(value);
    else if (key == "seed") cfg.seed = std::stoull(value);
    else if (key == "epochs") cfg.epochs = std::stol(value);
    else if (key == "batch_size") cfg.batch_size = std::stol(value);
    else if (key == "lr_phi") cfg.lr_phi = std::stod(value);
    else if (key == "lr_theta") cfg.lr_theta = std::stod(value);
    else if (key == "adam_beta1") cfg.adam_beta1 = std::stod(value);
    else if (key == "adam_beta2") cfg.adam_beta2 = std::stod(value);
    else if (key == "adam_eps") cfg.adam_eps = std::stod(value);
    else if (key == "cg_iters") cfg.cg_iters = std::stol(value);
    else if (key == "cg_tol") cfg.cg_tol = std::stod(value);
    else if (key == "center_fraction") cfg.center_fraction = std::stod(value);
    else if (key == "vd_sigma") cfg.vd_sigma = std::stod(value);
    else if (key == "denoiser_depth") cfg.denoiser_depth = std::stol(value);
    else if (key == "denoiser_width") cfg.denoiser_width = std::stol(value);
    else if (key == "n_train") cfg.n_train = std::stol(value);
    else if (key == "n_val") cfg.n_val = std::stol(value);
    else if (key == "n_test") cfg.n_test = std::stol(value);
    else if (key == "val_every") cfg.val_every = std::stol(value);
    else if (key == "threads") cfg.threads = std::stol(value);
    else if (key == "augment_phi_patterns")
      cfg.augment_phi_patterns = parse_bool(value);
    else if (key == "train_center") cfg.train_center = parse_bool(value);
    else throw std::invalid_argument("config: unknown key '" + key + "'");
  } catch (const std::invalid_argument&) {
    throw;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: bad value for key '" + key + "'");
  }
}

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string s = line;
    std::size_t hash = s.find('#');
    if (hash != std::string::npos) s = s.substr(0, hash);
    s = trim(s);
    if (s.empty()) continue;
    std::size_t eq = s.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: missing '=' on line " +
                                  std::to_string(line_no));
    apply_override(cfg, trim(s.substr(0, eq)), trim(s.substr(eq + 1)));
  }
  return cfg;
}

ExperimentConfig parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

void ExperimentConfig::finalize() {
  if (mode != "1d" && mode != "2d")
    throw std::invalid_argument("config: mode must be 1d or 2d");
  if (arch != "unrolled" && arch != "direct")
    throw std::invalid_argument("config: arch must be unrolled or direct");
  if (strategy != "phi_alone" && strategy != "theta_alone" &&
      strategy != "joint")
    throw std::invalid_argument("config: bad strategy");
  if (grid_p < 1 || (mode == "2d" && grid_q < 1))
    throw std::invalid_argument("config: bad grid");
  if (coils < 1) throw std::invalid_argument("config: coils must be >= 1");
  if (!(accel >= 1.0)) throw std::invalid_argument("config: accel must be >= 1");
  if (epochs < 0 || batch_size < 1)
    throw std::invalid_argument("config: bad epochs/batch_size");
  if (!(lr_phi >= 0.0) || !(lr_theta >= 0.0))
    throw std::invalid_argument("config: learning rates must be >= 0");
  if (!(adam_beta1 > 0.0 && adam_beta1 < 1.0) ||
      !(adam_beta2 > 0.0 && adam_beta2 < 1.0))
    throw std::invalid_argument("config: adam betas must be in (0,1)");
  if (cg_iters < 1 || !(cg_tol > 0.0))
    throw std::invalid_argument("config: bad cg settings");
  if (unroll_depth < 1)
    throw std::invalid_argument("config: unroll_depth must be >= 1");
  if (denoiser_depth < 1 || denoiser_width < 1)
    throw std::invalid_argument("config: bad denoiser size");

  if (mode == "1d") {
    grid_q = 1;
    m_h = 1;
    if (m_v == 0)
      m_v = std::max(1L, static_cast<long>(std::lround(grid_p / accel)));
    if (m_v > grid_p)
      throw std::invalid_argument("config: m_v exceeds grid");
  } else {
    if (m_v == 0 || m_h == 0) {
      const double total = double(grid_p) * double(grid_q) / accel;
      long side = std::max(1L, static_cast<long>(std::lround(std::sqrt(total))));
      if (m_v == 0) m_v = side;
      if (m_h == 0) m_h = side;
    }
    if (m_v > grid_p || m_h > grid_q)
      throw std::invalid_argument("config: sample counts exceed grid");
  }
}

}  // namespace ksopt
