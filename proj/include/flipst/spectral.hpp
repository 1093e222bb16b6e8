#pragma once

#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "flipst/grid.hpp"

namespace flipst {

struct Wavenumber {
  int k1 = 0;
  int k2 = 0;
  long long norm2() const { return 1LL * k1 * k1 + 1LL * k2 * k2; }
  friend bool operator==(const Wavenumber&, const Wavenumber&) = default;
};

/// Self-conjugate set K1 and one representative per conjugate pair K2.
///
/// K2 covers k1 = 0 and k1 = n1/2 with k2 = 1..n2/2-1, and every
/// k1 = 1..n1/2-1 with k2 in (-n2/2, n2/2]. Together |K1| + 2|K2| = n1 n2.
struct WavenumberSets {
  GridSpec grid;
  std::vector<Wavenumber> k1_list;
  std::vector<Wavenumber> k2_list;
};

WavenumberSets build_wavenumbers(GridSpec g);

enum class Branch { cos, sin };

/// One real coefficient: a wavenumber plus branch. Paired (K2) coefficients
/// carry the synthesis weight 2.
struct Coefficient {
  Wavenumber k;
  Branch branch = Branch::cos;
  bool paired = false;
  double weight() const { return paired ? 2.0 : 1.0; }
};

/// Low-frequency truncation of the real Fourier basis.
///
/// Modes are ranked by |k| ascending, ties by (k1, k2). A retained prefix
/// never splits a cos/sin pair, so the retained count is the largest prefix
/// size not exceeding the requested budget. Coefficients are laid out as
/// (cos over retained K1, cos over retained K2, sin over retained K2), each
/// block in rank order.
class ModeOrdering {
public:
  ModeOrdering() = default;

  static ModeOrdering full(GridSpec g);
  static ModeOrdering truncated(GridSpec g, int budget);

  const GridSpec& grid() const { return data_->grid; }
  const WavenumberSets& sets() const { return data_->sets; }
  int size() const { return static_cast<int>(data_->layout.size()); }
  bool is_full() const { return size() == grid().size(); }
  int k1_count() const { return data_->k1_count; }
  int k2_count() const { return data_->k2_count; }

  const std::vector<Coefficient>& coefficients() const { return data_->layout; }
  const Coefficient& operator[](int idx) const { return data_->layout[idx]; }

  /// Positions of the retained coefficients in the untruncated rank sequence
  /// (cos then sin for each K2 mode). Always a prefix 0..K-1.
  const std::vector<int>& retained() const { return data_->retained; }

  std::optional<int> index_of(Wavenumber k, Branch b) const;

  friend bool operator==(const ModeOrdering& a, const ModeOrdering& b) {
    return a.data_ == b.data_ || (a.grid() == b.grid() && a.size() == b.size());
  }

private:
  struct Data {
    GridSpec grid;
    WavenumberSets sets;
    std::vector<Coefficient> layout;
    std::vector<int> retained;
    int k1_count = 0;
    int k2_count = 0;
  };
  std::shared_ptr<const Data> data_;
};

struct SpectralState {
  ModeOrdering ordering;
  Eigen::VectorXd alpha;
};

/// Phase 2 pi k.s at grid point (i, j), reduced exactly with integer arithmetic.
double mode_phase(Wavenumber k, int i, int j, GridSpec g);

/// Projection onto the retained basis through a 2-D FFT. For K2 modes the
/// stored coefficient is the unweighted projection (1/N) sum f cos / sin; the
/// factor 2 appears on the synthesis side only.
SpectralState analyze(const Field& f, const ModeOrdering& ord);

/// sum_K1 a cos + 2 sum_K2 (a cos + b sin) over retained modes.
Field synthesize(const SpectralState& a);

/// Re-express coefficients on another ordering of the same grid; modes absent
/// from `from` become zero.
Eigen::VectorXd restrict_coefficients(const Eigen::VectorXd& alpha, const ModeOrdering& from,
                                      const ModeOrdering& to);

/// Dense N x K synthesis matrix: column c is weight(c) * cos/sin(2 pi k.s).
struct BasisMatrix {
  ModeOrdering ordering;
  Eigen::MatrixXd matrix;
};

BasisMatrix basis_matrix(const ModeOrdering& ord);

/// H = pinv(F*) R F, mapping original-domain coefficients to flipped-domain
/// coefficients, with its Moore-Penrose inverse. At full column rank that is
/// the left inverse (H^T H)^-1 H^T and H^+ H = I.
struct FlipTransfer {
  ModeOrdering original;
  ModeOrdering flipped;
  FlipVariant variant;
  Eigen::MatrixXd h;
  Eigen::MatrixXd h_pinv;
  int rank = 0;
};

FlipTransfer flip_transfer(const ModeOrdering& ord, const ModeOrdering& ord_star,
                           FlipVariant v = {});

} // namespace flipst
