#include "flipst/spectral.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <unordered_map>

#include "flipst/error.hpp"
#include "flipst/fft.hpp"

namespace flipst {
namespace {

long long wrap(long long a, long long n) {
  const long long r = a % n;
  return r < 0 ? r + n : r;
}

struct RankedMode {
  Wavenumber k;
  bool paired;
};

std::vector<RankedMode> ranked_modes(const WavenumberSets& sets) {
  std::vector<RankedMode> modes;
  modes.reserve(sets.k1_list.size() + sets.k2_list.size());
  for (const auto& k : sets.k1_list) modes.push_back({k, false});
  for (const auto& k : sets.k2_list) modes.push_back({k, true});
  std::sort(modes.begin(), modes.end(), [](const RankedMode& a, const RankedMode& b) {
    if (a.k.norm2() != b.k.norm2()) return a.k.norm2() < b.k.norm2();
    if (a.k.k1 != b.k.k1) return a.k.k1 < b.k.k1;
    return a.k.k2 < b.k.k2;
  });
  return modes;
}

} // namespace

WavenumberSets build_wavenumbers(GridSpec g) {
  g.validate();
  const int h1 = g.n1 / 2;
  const int h2 = g.n2 / 2;
  WavenumberSets sets;
  sets.grid = g;
  sets.k1_list = {{0, 0}, {0, h2}, {h1, 0}, {h1, h2}};
  sets.k2_list.reserve((g.size() - 4) / 2);
  for (int k2 = 1; k2 < h2; ++k2) sets.k2_list.push_back({0, k2});
  for (int k1 = 1; k1 < h1; ++k1) {
    for (int k2 = -h2 + 1; k2 <= h2; ++k2) sets.k2_list.push_back({k1, k2});
  }
  for (int k2 = 1; k2 < h2; ++k2) sets.k2_list.push_back({h1, k2});
  return sets;
}

ModeOrdering ModeOrdering::full(GridSpec g) { return truncated(g, g.size()); }

ModeOrdering ModeOrdering::truncated(GridSpec g, int budget) {
  if (budget < 1) {
    throw ConfigError("truncation budget must be positive, got " + std::to_string(budget));
  }
  auto data = std::make_shared<Data>();
  data->grid = g;
  data->sets = build_wavenumbers(g);

  std::vector<Wavenumber> k1_kept;
  std::vector<Wavenumber> k2_kept;
  int used = 0;
  for (const auto& m : ranked_modes(data->sets)) {
    const int cost = m.paired ? 2 : 1;
    if (used + cost > budget) break;
    used += cost;
    (m.paired ? k2_kept : k1_kept).push_back(m.k);
  }

  data->k1_count = static_cast<int>(k1_kept.size());
  data->k2_count = static_cast<int>(k2_kept.size());
  data->layout.reserve(used);
  for (const auto& k : k1_kept) data->layout.push_back({k, Branch::cos, false});
  for (const auto& k : k2_kept) data->layout.push_back({k, Branch::cos, true});
  for (const auto& k : k2_kept) data->layout.push_back({k, Branch::sin, true});
  data->retained.resize(used);
  for (int i = 0; i < used; ++i) data->retained[i] = i;

  ModeOrdering ord;
  ord.data_ = std::move(data);
  return ord;
}

std::optional<int> ModeOrdering::index_of(Wavenumber k, Branch b) const {
  const int nk1 = k1_count();
  const int nk2 = k2_count();
  const auto& layout = data_->layout;
  if (b == Branch::cos) {
    for (int i = 0; i < nk1; ++i) {
      if (layout[i].k == k) return i;
    }
    for (int i = 0; i < nk2; ++i) {
      if (layout[nk1 + i].k == k) return nk1 + i;
    }
  } else {
    for (int i = 0; i < nk2; ++i) {
      if (layout[nk1 + nk2 + i].k == k) return nk1 + nk2 + i;
    }
  }
  return std::nullopt;
}

double mode_phase(Wavenumber k, int i, int j, GridSpec g) {
  const long long n = g.size();
  const long long num = wrap(1LL * k.k1 * j * g.n2 + 1LL * k.k2 * i * g.n1, n);
  return 2.0 * std::numbers::pi * static_cast<double>(num) / static_cast<double>(n);
}

SpectralState analyze(const Field& f, const ModeOrdering& ord) {
  if (!(f.grid == ord.grid())) {
    throw ConfigError("analyze: field grid " + std::to_string(f.grid.n1) + "x" +
                      std::to_string(f.grid.n2) + " does not match ordering grid " +
                      std::to_string(ord.grid().n1) + "x" + std::to_string(ord.grid().n2));
  }
  const GridSpec g = f.grid;
  const Eigen::MatrixXcd spec = fft::forward2(f.image());
  const double inv_n = 1.0 / g.size();
  SpectralState out{ord, Eigen::VectorXd(ord.size())};
  for (int c = 0; c < ord.size(); ++c) {
    const auto& coef = ord[c];
    const auto x = spec(wrap(coef.k.k2, g.n2), wrap(coef.k.k1, g.n1));
    out.alpha[c] = coef.branch == Branch::cos ? x.real() * inv_n : -x.imag() * inv_n;
  }
  return out;
}

Field synthesize(const SpectralState& a) {
  const ModeOrdering& ord = a.ordering;
  const GridSpec g = ord.grid();
  Eigen::MatrixXcd spec = Eigen::MatrixXcd::Zero(g.n2, g.n1);
  const double n = g.size();
  for (int c = 0; c < ord.size(); ++c) {
    const auto& coef = ord[c];
    const double v = a.alpha[c] * n;
    const auto r = wrap(coef.k.k2, g.n2);
    const auto col = wrap(coef.k.k1, g.n1);
    if (!coef.paired) {
      spec(r, col) += v;
      continue;
    }
    const auto rc = wrap(-coef.k.k2, g.n2);
    const auto cc = wrap(-coef.k.k1, g.n1);
    if (coef.branch == Branch::cos) {
      spec(r, col) += v;
      spec(rc, cc) += v;
    } else {
      spec(r, col) += std::complex<double>(0.0, -v);
      spec(rc, cc) += std::complex<double>(0.0, v);
    }
  }
  return Field::from_image(fft::inverse2_real(spec));
}

Eigen::VectorXd restrict_coefficients(const Eigen::VectorXd& alpha, const ModeOrdering& from,
                                      const ModeOrdering& to) {
  if (!(from.grid() == to.grid())) {
    throw ConfigError("restrict_coefficients: orderings live on different grids");
  }
  // Both layouts are rank-ordered prefixes of the same sequence; match by key.
  std::unordered_map<long long, int> lookup;
  lookup.reserve(from.size());
  auto key = [](const Coefficient& c) {
    return (static_cast<long long>(c.k.k1) << 33) ^ (static_cast<long long>(c.k.k2 + (1 << 20)) << 1) ^
           (c.branch == Branch::sin ? 1LL : 0LL);
  };
  for (int i = 0; i < from.size(); ++i) lookup.emplace(key(from[i]), i);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(to.size());
  for (int i = 0; i < to.size(); ++i) {
    const auto it = lookup.find(key(to[i]));
    if (it != lookup.end()) out[i] = alpha[it->second];
  }
  return out;
}

BasisMatrix basis_matrix(const ModeOrdering& ord) {
  const GridSpec g = ord.grid();
  Eigen::MatrixXd m(g.size(), ord.size());
  for (int c = 0; c < ord.size(); ++c) {
    const auto& coef = ord[c];
    for (int j = 0; j < g.n1; ++j) {
      for (int i = 0; i < g.n2; ++i) {
        const double th = mode_phase(coef.k, i, j, g);
        m(j * g.n2 + i, c) = coef.weight() * (coef.branch == Branch::cos ? std::cos(th) : std::sin(th));
      }
    }
  }
  return {ord, std::move(m)};
}

FlipTransfer flip_transfer(const ModeOrdering& ord, const ModeOrdering& ord_star, FlipVariant v) {
  if (!(ord_star.grid() == ord.grid().doubled())) {
    throw ConfigError("flip_transfer: flipped ordering must live on the doubled grid");
  }
  const Eigen::MatrixXd basis = basis_matrix(ord).matrix;
  Eigen::MatrixXd h(ord_star.size(), ord.size());
  for (int c = 0; c < ord.size(); ++c) {
    const Field column(ord.grid(), basis.col(c));
    h.col(c) = analyze(flip_field(column, v), ord_star).alpha;
  }

  Eigen::BDCSVD<Eigen::MatrixXd> svd(h, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  if (sv.size() == 0 || sv[0] <= 0.0) throw NumericalError("flip_transfer: H vanishes");
  int rank = 0;
  while (rank < sv.size() && sv[rank] > 1e-10 * sv[0]) ++rank;

  Eigen::MatrixXd pinv;
  if (rank == ord.size()) {
    Eigen::LLT<Eigen::MatrixXd> gram(h.transpose() * h);
    if (gram.info() != Eigen::Success) throw NumericalError("flip_transfer: H^T H is not positive definite");
    pinv = gram.solve(h.transpose());
  } else {
    // Mirror images of the higher original modes fall outside the flipped
    // budget; H then has a clean null space and H^+ is the truncated SVD inverse.
    pinv = svd.matrixV().leftCols(rank) * sv.head(rank).cwiseInverse().asDiagonal() *
           svd.matrixU().leftCols(rank).transpose();
  }
  return {ord, ord_star, v, std::move(h), std::move(pinv), rank};
}

} // namespace flipst
