#include "fdmr/channel.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace fdmr {

double los_transition_indoor(double r_km) { return std::exp(-(r_km - 0.018) / 0.027); }

double los_probability_indoor(double r_km) {
  if (r_km < 0.0) throw std::invalid_argument("negative distance");
  if (r_km <= 0.018) return 1.0;
  if (r_km < 0.037) return los_transition_indoor(r_km);
  return 0.5;
}

double los_probability_outdoor(double r_km) {
  if (r_km <= 0.0) return 1.0;
  const double p = 0.5 - std::min(0.5, 5.0 * std::exp(-0.156 / r_km)) +
                   std::min(0.5, 5.0 * std::exp(-r_km / 0.03));
  return std::clamp(p, 0.0, 1.0);
}

double path_loss_db(LinkClass cls, double r_km, bool los) {
  if (!(r_km > 0.0)) throw std::invalid_argument("path_loss_db: distance must be positive");
  const double lg = std::log10(r_km);
  switch (cls) {
    case LinkClass::IndoorIntra:
      return los ? 89.5 + 16.9 * lg : 147.4 + 43.3 * lg;
    case LinkClass::IndoorInter:
      return std::max(131.1 + 42.8 * lg, 147.4 + 43.3 * lg);
    case LinkClass::OutdoorBsUe:
      return los ? 103.8 + 20.9 * lg : 145.4 + 37.5 * lg;
    case LinkClass::OutdoorBsBs:
      if (!los) return 169.36 + 40.0 * lg;
      return r_km < 2.0 / 3.0 ? 98.4 + 20.0 * lg : 101.9 + 40.0 * lg;
    case LinkClass::OutdoorUeUe:
      return r_km <= 0.05 ? 98.45 + 20.0 * lg : 175.78 + 40.0 * lg;
  }
  throw std::invalid_argument("path_loss_db: unknown link class");
}

ChannelModelParams ChannelModelParams::indoor() { return {}; }

ChannelModelParams ChannelModelParams::outdoor() {
  ChannelModelParams p;
  p.min_distance_m = 3.0;
  p.noise_figure_bs_db = 13.0;
  p.penetration_db = 0.0;
  return p;
}

void ChannelModelParams::validate() const {
  if (sigma_los_db < 0 || sigma_nlos_db < 0 || sigma_bs_bs_db < 0 || sigma_ue_ue_outdoor_db < 0) {
    throw std::invalid_argument("shadowing sigma must be >= 0");
  }
  if (!(bandwidth_hz > 0)) throw std::invalid_argument("bandwidth must be > 0");
  if (!(min_distance_m > 0)) throw std::invalid_argument("min distance must be > 0");
}

std::vector<int> ChannelGains::interferers_of(int i) const {
  std::vector<int> out;
  for (int j = 0; j < num_ues(); ++j) {
    if (measured(j, i) > 0.0) out.push_back(j);
  }
  return out;
}

namespace {

enum class PairKind : std::uint64_t { BsUe = 1, BsBs = 2, UeUe = 3 };

struct LinkSpec {
  LinkClass cls;
  double r_km;
  double los_prob;
  double sigma_los;
  double sigma_nlos;
  double penetration_db;
};

double draw_loss_db(const LinkSpec& s, const ChannelModelParams& params, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double u = unit(rng);
  bool los = u < s.los_prob;
  if (params.los == LosMode::AlwaysLos) los = true;
  if (params.los == LosMode::NeverLos) los = false;
  const double sigma = los ? s.sigma_los : s.sigma_nlos;
  double shadow = 0.0;
  if (sigma > 0.0) shadow = std::normal_distribution<double>(0.0, sigma)(rng);
  return path_loss_db(s.cls, s.r_km, los) + s.penetration_db + shadow;
}

LinkSpec indoor_spec(double r_km, bool same_room, const ChannelModelParams& p) {
  return {same_room ? LinkClass::IndoorIntra : LinkClass::IndoorInter, r_km,
          los_probability_indoor(r_km), p.sigma_los_db, p.sigma_nlos_db,
          same_room ? 0.0 : p.penetration_db};
}

}  // namespace

ChannelGains compute_channel_gains(const Topology& topo, const ChannelModelParams& params,
                                   std::uint64_t seed, ExecPolicy policy) {
  params.validate();
  const int m = topo.num_cells();
  const int n = topo.num_ues();
  const bool indoor = topo.scenario == Scenario::IndoorRrh;
  const bool parallel = policy == ExecPolicy::Parallel;
  auto km = [&](double meters) { return std::max(meters, params.min_distance_m) / 1000.0; };

  ChannelGains g;
  g.bs_ue = Eigen::MatrixXd::Zero(m, n);
  g.bs_bs = Eigen::MatrixXd::Zero(m, m);
  g.ue_ue = Eigen::MatrixXd::Zero(n, n);
  g.measured = Eigen::MatrixXd::Zero(n, n);

#pragma omp parallel for schedule(static) if (parallel)
  for (int c = 0; c < m; ++c) {
    for (int u = 0; u < n; ++u) {
      const double r = km(topo.bs_ue_distance(c, u));
      const LinkSpec s = indoor ? indoor_spec(r, topo.ue_cell[u] == c, params)
                                : LinkSpec{LinkClass::OutdoorBsUe, r, los_probability_outdoor(r),
                                           params.sigma_los_db, params.sigma_nlos_db, 0.0};
      const auto key = derive_seed(seed, static_cast<std::uint64_t>(PairKind::BsUe),
                                   static_cast<std::uint64_t>(c) * n + u);
      g.bs_ue(c, u) = db_to_linear(-draw_loss_db(s, params, key));
    }
  }

  for (int a = 0; a < m; ++a) {
    for (int b = a + 1; b < m; ++b) {
      const double r = km(topo.distance(topo.bs[a], topo.bs[b]));
      const LinkSpec s = indoor ? indoor_spec(r, false, params)
                                : LinkSpec{LinkClass::OutdoorBsBs, r, los_probability_outdoor(r),
                                           params.sigma_bs_bs_db, params.sigma_bs_bs_db, 0.0};
      const auto key = derive_seed(seed, static_cast<std::uint64_t>(PairKind::BsBs),
                                   static_cast<std::uint64_t>(a) * m + b);
      g.bs_bs(a, b) = g.bs_bs(b, a) = db_to_linear(-draw_loss_db(s, params, key));
    }
  }

#pragma omp parallel for schedule(dynamic, 4) if (parallel)
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double r = km(topo.distance(topo.ue[i], topo.ue[j]));
      const LinkSpec s =
          indoor ? indoor_spec(r, topo.ue_cell[i] == topo.ue_cell[j], params)
                 : LinkSpec{LinkClass::OutdoorUeUe, r, 0.0, params.sigma_ue_ue_outdoor_db,
                            params.sigma_ue_ue_outdoor_db, 0.0};
      const auto key = derive_seed(seed, static_cast<std::uint64_t>(PairKind::UeUe),
                                   static_cast<std::uint64_t>(i) * n + j);
      g.ue_ue(i, j) = g.ue_ue(j, i) = db_to_linear(-draw_loss_db(s, params, key));
    }
  }
  return g;
}

InterfererStats compute_strong_interferers(ChannelGains& gains, const Topology& topo) {
  const int n = gains.num_ues();
  const int m = gains.num_cells();
  InterfererStats stats;
  stats.list_size.assign(n, 0);
  gains.measured = Eigen::MatrixXd::Zero(n, n);
  for (int u = 0; u < n; ++u) {
    double sum = 0.0;
    int count = 0;
    for (int c = 0; c < m; ++c) {
      if (c == topo.ue_cell[u]) continue;
      sum += gains.bs_ue(c, u);
      ++count;
    }
    // Single-cell networks have no BS-to-UE interference to calibrate against.
    const double threshold = count > 0 ? sum / count : kInf;
    for (int j = 0; j < n; ++j) {
      if (j != u && gains.ue_ue(j, u) > threshold) {
        gains.measured(j, u) = gains.ue_ue(j, u);
        ++stats.list_size[u];
      }
    }
  }
  stats.cell_mean.assign(m, 0.0);
  for (int c = 0; c < m; ++c) {
    const auto& members = topo.cells[c];
    if (members.empty()) continue;
    double s = 0.0;
    for (int u : members) s += stats.list_size[u];
    stats.cell_mean[c] = s / members.size();
  }
  double total = 0.0;
  for (int k : stats.list_size) total += k;
  stats.mean = n > 0 ? total / n : 0.0;
  return stats;
}

ChannelGains apply_block_fading(const ChannelGains& base, std::uint64_t seed, std::int64_t slot) {
  ChannelGains g = base;
  const int m = g.num_cells();
  const int n = g.num_ues();
  std::mt19937_64 rng(derive_seed(seed, 0xFADE, static_cast<std::uint64_t>(slot)));
  std::exponential_distribution<double> expo(1.0);
  for (int c = 0; c < m; ++c)
    for (int u = 0; u < n; ++u) g.bs_ue(c, u) *= expo(rng);
  for (int a = 0; a < m; ++a)
    for (int b = a + 1; b < m; ++b) {
      const double f = expo(rng);
      g.bs_bs(a, b) *= f;
      g.bs_bs(b, a) *= f;
    }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double f = expo(rng);
      g.ue_ue(i, j) *= f;
      g.ue_ue(j, i) *= f;
    }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (g.measured(j, i) > 0.0) g.measured(j, i) = g.ue_ue(j, i);
  return g;
}

namespace {

nlohmann::json matrix_db(const Eigen::MatrixXd& mat) {
  nlohmann::json rows = nlohmann::json::array();
  for (int r = 0; r < mat.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (int c = 0; c < mat.cols(); ++c) {
      const double v = mat(r, c);
      row.push_back(v > 0.0 ? nlohmann::json(linear_to_db(v)) : nlohmann::json(nullptr));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_db(const nlohmann::json& rows) {
  const auto r = static_cast<Eigen::Index>(rows.size());
  const auto c = r > 0 ? static_cast<Eigen::Index>(rows.at(0).size()) : 0;
  Eigen::MatrixXd mat = Eigen::MatrixXd::Zero(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    if (static_cast<Eigen::Index>(rows[i].size()) != c) throw std::invalid_argument("ragged matrix");
    for (Eigen::Index k = 0; k < c; ++k) {
      const auto& v = rows[i][k];
      mat(i, k) = v.is_null() ? 0.0 : db_to_linear(v.get<double>());
    }
  }
  return mat;
}

}  // namespace

nlohmann::json to_json(const ChannelGains& gains) {
  return {{"units", "dB"},
          {"bs_ue", matrix_db(gains.bs_ue)},
          {"bs_bs", matrix_db(gains.bs_bs)},
          {"ue_ue", matrix_db(gains.ue_ue)},
          {"measured_ue_ue", matrix_db(gains.measured)}};
}

ChannelGains gains_from_json(const nlohmann::json& j) {
  ChannelGains g;
  g.bs_ue = matrix_from_db(j.at("bs_ue"));
  g.bs_bs = matrix_from_db(j.at("bs_bs"));
  g.ue_ue = matrix_from_db(j.at("ue_ue"));
  g.measured = matrix_from_db(j.at("measured_ue_ue"));
  if (g.bs_bs.rows() != g.bs_ue.rows() || g.ue_ue.rows() != g.bs_ue.cols() ||
      g.measured.rows() != g.ue_ue.rows()) {
    throw std::invalid_argument("gain matrix dimensions disagree");
  }
  return g;
}

}  // namespace fdmr
