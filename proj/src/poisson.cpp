#include "vortexmap/poisson.hpp"

#include <bit>
#include <chrono>
#include <cmath>
#include <ostream>

namespace vxm {

namespace {

constexpr std::uint8_t kUnknownBit = 1;

/// Transverse slot: bit (1 + slot) of a face flag marks a non-interior
/// vorticity sample between the face and its neighbour along axis b.
/// slot = 2 * (position of b among the transverse axes) + side.
int slot_of(int t, int side) { return 2 * t + side; }

int third_axis(int a, int b) { return 3 - a - b; }

/// Coefficient of face-a in the circulation of the edge on `side` (0: below,
/// 1: above) along transverse axis b.
int circulation_sign_self(int a, int b, int side) {
  const int c = third_axis(a, b);
  const int s0 = a == (c + 2) % 3 ? 1 : -1;
  return side == 0 ? s0 : -s0;
}

/// Coefficient of the b-face sharing the edge index in that circulation; the
/// b-face shifted by -e_a has the opposite sign.
int circulation_sign_cross(int a, int b) {
  const int c = third_axis(a, b);
  return b == (c + 2) % 3 ? 1 : -1;
}

bool in_shape(const Index3& x, const Index3& s) {
  for (int a = 0; a < 3; ++a)
    if (x[a] < 0 || x[a] >= s[a]) return false;
  return true;
}

std::size_t lin(const Index3& x, const Index3& s) {
  return (static_cast<std::size_t>(x[0]) * s[1] + x[1]) * s[2] + x[2];
}

Index3 unravel(std::size_t n, const Index3& s) {
  const int k = static_cast<int>(n % s[2]);
  n /= s[2];
  return {static_cast<int>(n / s[1]), static_cast<int>(n % s[1]), k};
}

std::array<int, 2> transverse_axes(int a, int dim, int& count) {
  std::array<int, 2> t{0, 0};
  count = 0;
  for (int b = 0; b < dim; ++b)
    if (b != a) t[count++] = b;
  return t;
}

/// One grid of the hierarchy with its classification and flat face layout.
struct Level {
  GridDesc grid;
  SolidBoundary solids;
  DofClassification cls;
  std::array<Index3, 3> shape{};
  std::array<std::size_t, 3> offset{};
  std::size_t total = 0;
  std::vector<std::uint8_t> flags;
  std::vector<double> inv_diag_compatible;
  std::vector<double> inv_diag_plain;
  mutable std::vector<double> x, b, r, tmp;

  Level(const GridDesc& g, SolidBoundary s) : grid(g), solids(std::move(s)) {
    cls = classify_dofs(grid, solids);
    std::size_t off = 0;
    for (int a : face_axes(grid.dim)) {
      shape[a] = face_layout(grid, a).shape;
      offset[a] = off;
      off += static_cast<std::size_t>(shape[a][0]) * shape[a][1] * shape[a][2];
    }
    total = off;
    flags.assign(total, 0);
    inv_diag_compatible.assign(total, 0.0);
    inv_diag_plain.assign(total, 0.0);
    for (int a : face_axes(grid.dim)) {
      int nt = 0;
      const auto tr = transverse_axes(a, grid.dim, nt);
      const Index3 s = shape[a];
      for (std::size_t n = 0; n < cls.face[a].size(); ++n) {
        if (cls.face[a][n] != FaceStatus::Unknown) continue;
        const Index3 f = unravel(n, s);
        std::uint8_t fl = kUnknownBit;
        for (int t = 0; t < nt; ++t) {
          const int b = tr[t];
          const int c = third_axis(a, b);
          const Index3 es = edge_layout(grid, c).shape;
          for (int side = 0; side < 2; ++side) {
            const Index3 e = side ? shifted(f, b, 1) : f;
            if (cls.vort[c][lin(e, es)] != VortStatus::Interior) fl |= std::uint8_t(1u << (1 + slot_of(t, side)));
          }
        }
        flags[offset[a] + n] = fl;
        const int removed = std::popcount(static_cast<unsigned>(fl >> 1));
        inv_diag_compatible[offset[a] + n] = 1.0 / (2 * grid.dim - removed);
        inv_diag_plain[offset[a] + n] = 1.0 / (2 * grid.dim);
      }
    }
    x.assign(total, 0.0);
    b.assign(total, 0.0);
    r.assign(total, 0.0);
    tmp.assign(total, 0.0);
  }

  const std::vector<double>& inv_diag(BoundaryCoupling m) const {
    return m == BoundaryCoupling::Compatible ? inv_diag_compatible : inv_diag_plain;
  }

  /// y = A x on the flat face layout; entries of x on Dirichlet faces must be zero.
  void apply(BoundaryCoupling mode, const double* xin, double* y) const {
    const int d = grid.dim;
    for (int a : face_axes(d)) {
      int nt = 0;
      const auto tr = transverse_axes(a, d, nt);
      const Index3 s = shape[a];
      const std::array<std::ptrdiff_t, 3> st{static_cast<std::ptrdiff_t>(s[1]) * s[2], s[2], 1};
      const std::size_t off = offset[a];
      const double* xa = xin + off;
      double* ya = y + off;
      const std::uint8_t* fa = flags.data() + off;
      std::size_t n = 0;
      for (int i = 0; i < s[0]; ++i)
        for (int j = 0; j < s[1]; ++j)
          for (int k = 0; k < s[2]; ++k, ++n) {
            const std::uint8_t fl = fa[n];
            if (!(fl & kUnknownBit)) {
              ya[n] = 0.0;
              continue;
            }
            double acc = xa[n - st[a]] + xa[n + st[a]];
            if ((fl >> 1) == 0) {
              for (int t = 0; t < nt; ++t) acc += xa[n - st[tr[t]]] + xa[n + st[tr[t]]];
              ya[n] = 2 * d * xa[n] - acc;
              continue;
            }
            const Index3 f{i, j, k};
            int diag = 2 * d;
            double cross = 0.0;
            for (int t = 0; t < nt; ++t) {
              const int b = tr[t];
              for (int side = 0; side < 2; ++side) {
                const bool boundary = fl & (1u << (1 + slot_of(t, side)));
                if (!boundary) {
                  acc += xa[side ? n + st[b] : n - st[b]];
                  continue;
                }
                if (mode == BoundaryCoupling::VelocityOnly) {
                  const Index3 nb = shifted(f, b, side ? 1 : -1);
                  if (in_shape(nb, s)) acc += xa[lin(nb, s)];
                  continue;
                }
                --diag;
                const Index3 e = side ? shifted(f, b, 1) : f;
                const int cef = circulation_sign_self(a, b, side);
                const int cg = circulation_sign_cross(a, b);
                const Index3& sb = shape[b];
                const double* xb = xin + offset[b];
                if (in_shape(e, sb)) cross -= cef * cg * xb[lin(e, sb)];
                const Index3 e2 = shifted(e, a, -1);
                if (in_shape(e2, sb)) cross += cef * cg * xb[lin(e2, sb)];
              }
            }
            ya[n] = diag * xa[n] - acc + cross;
          }
    }
  }

  std::vector<double> gather(const std::vector<double>& full) const {
    std::vector<double> out(cls.unknown_count());
    for (std::size_t u = 0; u < out.size(); ++u) {
      const auto [a, n] = cls.unknowns[u];
      out[u] = full[offset[a] + n];
    }
    return out;
  }

  std::vector<double> scatter(std::span<const double> compact) const {
    require(compact.size() == cls.unknown_count(), "coupled operator: vector size does not match unknown count");
    std::vector<double> full(total, 0.0);
    for (std::size_t u = 0; u < compact.size(); ++u) {
      const auto [a, n] = cls.unknowns[u];
      full[offset[a] + n] = compact[u];
    }
    return full;
  }
};

SolidBoundary coarsen_mask(const SolidBoundary& fine, const GridDesc& coarse) {
  SolidBoundary sb;
  sb.grid = coarse;
  sb.wall = FaceField(coarse);
  sb.ambient = fine.ambient;
  sb.solid.assign(coarse.cell_count(), 0);
  const Array3 cshape(coarse.dims);
  for (std::size_t n = 0; n < sb.solid.size(); ++n) {
    const Index3 c = cshape.unravel(n);
    bool all = true;
    const int kz = coarse.dim == 3 ? 2 : 1;
    for (int di = 0; di < 2 && all; ++di)
      for (int dj = 0; dj < 2 && all; ++dj)
        for (int dk = 0; dk < kz && all; ++dk)
          all = fine.is_solid({2 * c[0] + di, 2 * c[1] + dj, coarse.dim == 3 ? 2 * c[2] + dk : 0});
    sb.solid[n] = all ? 1 : 0;
  }
  return sb;
}

bool can_coarsen(const GridDesc& g) {
  for (int a = 0; a < g.dim; ++a)
    if (g.dims[a] % 2 != 0 || g.dims[a] / 2 < 4) return false;
  return true;
}

/// Interpolation weights from the coarse face-a grid onto fine index i along `axis`.
int prolong_weights(int a, int axis, int i, std::array<int, 2>& idx, std::array<double, 2>& w) {
  if (axis == a) {
    if (i % 2 == 0) {
      idx[0] = i / 2;
      w[0] = 1.0;
      return 1;
    }
    idx = {(i - 1) / 2, (i + 1) / 2};
    w = {0.5, 0.5};
    return 2;
  }
  const int J = i / 2;
  idx = {J, i % 2 == 0 ? J - 1 : J + 1};
  w = {0.75, 0.25};
  return 2;
}

/// fine += P coarse  (transpose=false) or coarse += P^T fine (transpose=true),
/// restricted to unknown faces on both levels.
/// Prolongation between two levels as (fine, coarse, weight) triplets.
struct Transfer {
  std::vector<std::uint32_t> fine, coarse;
  std::vector<double> weight;

  void prolong_add(const std::vector<double>& cv, std::vector<double>& fv) const {
    for (std::size_t n = 0; n < weight.size(); ++n) fv[fine[n]] += weight[n] * cv[coarse[n]];
  }
  void restrict_add(const std::vector<double>& fv, std::vector<double>& cv) const {
    for (std::size_t n = 0; n < weight.size(); ++n) cv[coarse[n]] += weight[n] * fv[fine[n]];
  }
};

Transfer build_transfer(const Level& fine, const Level& coarse) {
  Transfer T;
  const int d = fine.grid.dim;
  for (int a : face_axes(d)) {
    const Index3 fs = fine.shape[a];
    const Index3 cs = coarse.shape[a];
    const std::size_t foff = fine.offset[a], coff = coarse.offset[a];
    std::size_t n = 0;
    for (int i = 0; i < fs[0]; ++i)
      for (int j = 0; j < fs[1]; ++j)
        for (int k = 0; k < fs[2]; ++k, ++n) {
          if (!(fine.flags[foff + n] & kUnknownBit)) continue;
          const Index3 f{i, j, k};
          std::array<std::array<int, 2>, 3> ci{};
          std::array<std::array<double, 2>, 3> cw{};
          std::array<int, 3> cnt{1, 1, 1};
          for (int ax = 0; ax < 3; ++ax) {
            if (ax < d) {
              cnt[ax] = prolong_weights(a, ax, f[ax], ci[ax], cw[ax]);
            } else {
              ci[ax][0] = 0;
              cw[ax][0] = 1.0;
            }
          }
          for (int p = 0; p < cnt[0]; ++p)
            for (int q = 0; q < cnt[1]; ++q)
              for (int r = 0; r < cnt[2]; ++r) {
                const Index3 c{ci[0][p], ci[1][q], ci[2][r]};
                if (!in_shape(c, cs)) continue;
                const std::size_t cn = coff + lin(c, cs);
                if (!(coarse.flags[cn] & kUnknownBit)) continue;
                T.fine.push_back(static_cast<std::uint32_t>(foff + n));
                T.coarse.push_back(static_cast<std::uint32_t>(cn));
                T.weight.push_back(cw[0][p] * cw[1][q] * cw[2][r]);
              }
        }
  }
  return T;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t n = 0; n < a.size(); ++n) s += a[n] * b[n];
  return s;
}

}  // namespace

SolidBoundary SolidBoundary::closed_box(const GridDesc& g) {
  SolidBoundary sb;
  sb.grid = g;
  sb.solid.assign(g.cell_count(), 0);
  sb.wall = FaceField(g);
  return sb;
}

bool SolidBoundary::is_solid(const Index3& cell) const {
  for (int a = 0; a < 3; ++a)
    if (cell[a] < 0 || cell[a] >= grid.dims[a]) return true;
  return solid[lin(cell, grid.dims)] != 0;
}

std::size_t SolidBoundary::solid_count() const {
  std::size_t n = 0;
  for (auto s : solid) n += s != 0;
  return n;
}

void SolidBoundary::validate() const {
  grid.validate();
  require(solid.size() == grid.cell_count(), "SolidBoundary: mask shape does not match grid");
  require(wall.matches(grid), "SolidBoundary: wall velocity layout does not match grid");
  require(wall.all_finite(), "SolidBoundary: non-finite wall velocity");
}

DofClassification classify_dofs(const GridDesc& g, const SolidBoundary& solids) {
  require(solids.grid == g && solids.solid.size() == g.cell_count(), "classify_dofs: mask does not match grid");
  DofClassification cls;
  cls.grid = g;
  auto fluid = [&](const Index3& c) { return !solids.is_solid(c); };
  for (int a : face_axes(g.dim)) {
    const Array3 shape(face_layout(g, a).shape);
    auto& st = cls.face[a];
    auto& id = cls.unknown_id[a];
    st.assign(shape.size(), FaceStatus::Dirichlet);
    id.assign(shape.size(), -1);
    for (std::size_t n = 0; n < shape.size(); ++n) {
      const Index3 f = shape.unravel(n);
      if (fluid(shifted(f, a, -1)) && fluid(f)) {
        st[n] = FaceStatus::Unknown;
        id[n] = static_cast<std::int64_t>(cls.unknowns.size());
        cls.unknowns.emplace_back(a, n);
      }
    }
  }
  for (int c : vort_components(g.dim)) {
    const Array3 shape(edge_layout(g, c).shape);
    const int p = (c + 1) % 3, q = (c + 2) % 3;
    auto& st = cls.vort[c];
    st.assign(shape.size(), VortStatus::Interior);
    for (std::size_t n = 0; n < shape.size(); ++n) {
      const Index3 e = shape.unravel(n);
      int wet = 0;
      for (int dp = -1; dp <= 0; ++dp)
        for (int dq = -1; dq <= 0; ++dq) {
          Index3 cell = e;
          cell[p] += dp;
          cell[q] += dq;
          wet += fluid(cell) ? 1 : 0;
        }
      st[n] = wet == 4 ? VortStatus::Interior : (wet == 0 ? VortStatus::Excluded : VortStatus::Eliminated);
    }
  }
  return cls;
}

std::vector<double> setup_rhs(const VortField& w, const GridDesc& g, const SolidBoundary& solids,
                              const DofClassification& cls, BoundaryCoupling coupling) {
  require(w.matches(g), "setup_rhs: vorticity layout does not match grid");
  require(cls.grid == g && solids.grid == g, "setup_rhs: classification/grid mismatch");
  std::vector<double> rhs(cls.unknown_count(), 0.0);
  const int d = g.dim;
  for (std::size_t u = 0; u < rhs.size(); ++u) {
    const auto [a, n] = cls.unknowns[u];
    const Index3 s = face_layout(g, a).shape;
    const Index3 f = unravel(n, s);
    double r = 0.0;
    for (int side : {-1, 1}) {
      const Index3 nb = shifted(f, a, side);
      const std::size_t nn = lin(nb, s);
      if (cls.face[a][nn] == FaceStatus::Dirichlet) r += solids.wall[a].raw()[nn];
    }
    int nt = 0;
    const auto tr = transverse_axes(a, d, nt);
    for (int t = 0; t < nt; ++t) {
      const int b = tr[t];
      const int c = third_axis(a, b);
      const Index3 es = edge_layout(g, c).shape;
      const Index3& sb = face_layout(g, b).shape;
      for (int side = 0; side < 2; ++side) {
        const Index3 e = side ? shifted(f, b, 1) : f;
        const VortStatus vs = cls.vort[c][lin(e, es)];
        const int cef = circulation_sign_self(a, b, side);
        if (coupling == BoundaryCoupling::VelocityOnly) {
          if (vs != VortStatus::Excluded) r += cef * w[c][e] * g.dx;
          const Index3 nb = shifted(f, b, side ? 1 : -1);
          if (!in_shape(nb, s))
            r += solids.ambient[a];
          else if (cls.face[a][lin(nb, s)] == FaceStatus::Dirichlet)
            r += solids.wall[a][nb];
          continue;
        }
        if (vs == VortStatus::Interior) {
          r += cef * w[c][e] * g.dx;
          continue;
        }
        const int cg = circulation_sign_cross(a, b);
        const std::array<std::pair<Index3, int>, 2> crosses{{{e, cg}, {shifted(e, a, -1), -cg}}};
        for (const auto& [gidx, sign] : crosses) {
          if (!in_shape(gidx, sb))
            r += cef * sign * solids.ambient[b];
          else if (cls.face[b][lin(gidx, sb)] == FaceStatus::Dirichlet)
            r += cef * sign * solids.wall[b][gidx];
        }
      }
    }
    rhs[u] = r;
  }
  return rhs;
}

std::vector<double> apply_operator(std::span<const double> x, const GridDesc& g, const SolidBoundary& solids,
                                   const DofClassification& cls, BoundaryCoupling coupling) {
  require(cls.grid == g, "apply_operator: classification/grid mismatch");
  require(x.size() == cls.unknown_count(), "apply_operator: vector size does not match unknown count");
  const Level level(g, solids);
  require(level.cls.unknown_count() == cls.unknown_count(), "apply_operator: classification is stale for this mask");
  const std::vector<double> full = level.scatter(x);
  std::vector<double> y(level.total, 0.0);
  level.apply(coupling, full.data(), y.data());
  return level.gather(y);
}

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged:
      return "converged";
    case SolveStatus::MaxIterations:
      return "nonconverged";
    case SolveStatus::Diverged:
      return "diverged";
  }
  return "unknown";
}

struct PoissonSolver::Impl {
  PoissonSettings settings;
  std::vector<Level> levels;
  std::vector<Transfer> transfers;

  void smooth(const Level& L, int sweeps) const {
    const auto& inv = L.inv_diag(settings.coupling);
    const double om = settings.damping;
    for (int s = 0; s < sweeps; ++s) {
      L.apply(settings.coupling, L.x.data(), L.tmp.data());
      for (std::size_t n = 0; n < L.total; ++n) L.x[n] += om * inv[n] * (L.b[n] - L.tmp[n]);
    }
  }

  /// Solves approximately for levels[l].x given levels[l].b.
  void vcycle(std::size_t l) const {
    const Level& L = levels[l];
    std::fill(L.x.begin(), L.x.end(), 0.0);
    if (l + 1 == levels.size()) {
      smooth(L, settings.coarse_sweeps);
      return;
    }
    smooth(L, settings.pre_smooth);
    L.apply(settings.coupling, L.x.data(), L.tmp.data());
    for (std::size_t n = 0; n < L.total; ++n) L.r[n] = L.b[n] - L.tmp[n];
    const Level& C = levels[l + 1];
    std::fill(C.b.begin(), C.b.end(), 0.0);
    transfers[l].restrict_add(L.r, C.b);
    // Each level carries the (2h)^2-scaled operator: residual averaged over
    // the 2^d-weighted stencil and scaled by 4.
    const double scale = 4.0 / (1 << L.grid.dim);
    for (double& v : C.b) v *= scale;
    vcycle(l + 1);
    transfers[l].prolong_add(C.x, L.x);
    smooth(L, settings.post_smooth);
  }

  void apply_preconditioner(const std::vector<double>& r, std::vector<double>& z) const {
    const Level& L = levels.front();
    if (!settings.multigrid) {
      const auto& inv = L.inv_diag(settings.coupling);
      for (std::size_t n = 0; n < L.total; ++n) z[n] = inv[n] * r[n];
      return;
    }
    L.b = r;
    vcycle(0);
    z = L.x;
  }
};

PoissonSolver::PoissonSolver(const GridDesc& g, SolidBoundary solids, PoissonSettings settings)
    : impl_(std::make_unique<Impl>()) {
  require(solids.grid == g, "PoissonSolver: solid boundary grid mismatch");
  solids.validate();
  require(settings.tol > 0.0 && settings.tol < 1.0, "PoissonSolver: tolerance must lie in (0, 1)");
  require(settings.max_iters >= 1, "PoissonSolver: max_iters must be positive");
  impl_->settings = settings;
  impl_->levels.emplace_back(g, std::move(solids));
  while (can_coarsen(impl_->levels.back().grid)) {
    const Level& fine = impl_->levels.back();
    GridDesc cg = fine.grid;
    for (int a = 0; a < cg.dim; ++a) cg.dims[a] /= 2;
    cg.dx *= 2.0;
    SolidBoundary csb = coarsen_mask(fine.solids, cg);
    impl_->levels.emplace_back(cg, std::move(csb));
  }
  for (std::size_t l = 0; l + 1 < impl_->levels.size(); ++l)
    impl_->transfers.push_back(build_transfer(impl_->levels[l], impl_->levels[l + 1]));
}

PoissonSolver::~PoissonSolver() = default;
PoissonSolver::PoissonSolver(PoissonSolver&&) noexcept = default;
PoissonSolver& PoissonSolver::operator=(PoissonSolver&&) noexcept = default;

const GridDesc& PoissonSolver::grid() const { return impl_->levels.front().grid; }
const SolidBoundary& PoissonSolver::solids() const { return impl_->levels.front().solids; }
const DofClassification& PoissonSolver::classification() const { return impl_->levels.front().cls; }
const PoissonSettings& PoissonSolver::settings() const { return impl_->settings; }
void PoissonSolver::set_settings(const PoissonSettings& s) { impl_->settings = s; }
int PoissonSolver::levels() const { return static_cast<int>(impl_->levels.size()); }

void PoissonSolver::set_wall_velocities(const FaceField& wall) {
  require(wall.matches(grid()), "set_wall_velocities: layout mismatch");
  impl_->levels.front().solids.wall = wall;
}

std::vector<double> PoissonSolver::rhs(const VortField& w) const {
  const Level& L = impl_->levels.front();
  return setup_rhs(w, L.grid, L.solids, L.cls, impl_->settings.coupling);
}

std::vector<double> PoissonSolver::apply(std::span<const double> x) const {
  const Level& L = impl_->levels.front();
  const std::vector<double> full = L.scatter(x);
  std::vector<double> y(L.total, 0.0);
  L.apply(impl_->settings.coupling, full.data(), y.data());
  return L.gather(y);
}

std::vector<double> PoissonSolver::precondition(std::span<const double> r) const {
  const Level& L = impl_->levels.front();
  const std::vector<double> full = L.scatter(r);
  std::vector<double> z(L.total, 0.0);
  impl_->apply_preconditioner(full, z);
  return L.gather(z);
}

SolveResult PoissonSolver::solve(std::span<const double> rhs, const IterationObserver& observer) const {
  const auto t0 = std::chrono::steady_clock::now();
  const Level& L = impl_->levels.front();
  const PoissonSettings& st = impl_->settings;
  SolveResult res;
  std::vector<double> b = L.scatter(rhs);
  for (double v : b)
    if (!std::isfinite(v)) {
      res.status = SolveStatus::Diverged;
      res.relative_residual = std::numeric_limits<double>::quiet_NaN();
      res.x.assign(rhs.size(), 0.0);
      return res;
    }
  std::vector<double> x(L.total, 0.0);
  const double bnorm = std::sqrt(dot(b, b));
  auto finish = [&](SolveStatus s) {
    res.status = s;
    res.x = L.gather(x);
    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
  };
  if (bnorm == 0.0) return finish(SolveStatus::Converged);

  std::vector<double> r = b, z(L.total, 0.0), p, Ap(L.total, 0.0);
  impl_->apply_preconditioner(r, z);
  p = z;
  double rz = dot(r, z);
  res.relative_residual = 1.0;
  if (!(rz > 0.0) || !std::isfinite(rz)) return finish(SolveStatus::Diverged);
  for (int it = 1; it <= st.max_iters; ++it) {
    L.apply(st.coupling, p.data(), Ap.data());
    const double pAp = dot(p, Ap);
    if (!(pAp > 0.0) || !std::isfinite(pAp)) return finish(SolveStatus::Diverged);
    const double alpha = rz / pAp;
    for (std::size_t n = 0; n < L.total; ++n) {
      x[n] += alpha * p[n];
      r[n] -= alpha * Ap[n];
    }
    res.iterations = it;
    res.relative_residual = std::sqrt(dot(r, r)) / bnorm;
    res.residual_history.push_back(res.relative_residual);
    if (observer) observer(it, L.gather(x));
    if (!std::isfinite(res.relative_residual)) return finish(SolveStatus::Diverged);
    if (res.relative_residual <= st.tol) return finish(SolveStatus::Converged);
    impl_->apply_preconditioner(r, z);
    const double rz_new = dot(r, z);
    if (!(rz_new > 0.0) || !std::isfinite(rz_new)) return finish(SolveStatus::Diverged);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t n = 0; n < L.total; ++n) p[n] = z[n] + beta * p[n];
  }
  return finish(SolveStatus::MaxIterations);
}

FaceField PoissonSolver::velocity(std::span<const double> x) const {
  const Level& L = impl_->levels.front();
  require(x.size() == L.cls.unknown_count(), "velocity: vector size does not match unknown count");
  FaceField u = L.solids.wall;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const auto [a, n] = L.cls.unknowns[k];
    u[a].raw()[n] = x[k];
  }
  return u;
}

PoissonSolver::Reconstruction PoissonSolver::velocity_from_vorticity(const VortField& w) const {
  require(w.matches(grid()), "velocity_from_vorticity: vorticity layout does not match grid");
  require(w.all_finite(), "velocity_from_vorticity: non-finite vorticity");
  SolveResult r = solve(rhs(w));
  FaceField u = velocity(r.x);
  return {std::move(u), std::move(r)};
}

SolveResult mgpcg_solve(const CoupledSystem& sys, const SolidBoundary& solids, double tol, int max_iters) {
  PoissonSettings st;
  st.tol = tol;
  st.max_iters = max_iters;
  st.coupling = sys.coupling;
  const PoissonSolver solver(sys.grid, solids, st);
  require(solver.classification().unknown_count() == sys.rhs.size(), "mgpcg_solve: RHS size mismatch");
  return solver.solve(sys.rhs);
}

PoissonSolver::Reconstruction velocity_from_vorticity(const VortField& w, const GridDesc& g,
                                                       const SolidBoundary& solids,
                                                       const PoissonSettings& settings) {
  return PoissonSolver(g, solids, settings).velocity_from_vorticity(w);
}

SolveLog::SolveLog(std::ostream& os, bool header) : os_(os) {
  if (header) os_ << "step,unknowns,iterations,residual,seconds\n";
}

void SolveLog::record(long step, std::size_t unknowns, const SolveResult& r) {
  os_ << step << ',' << unknowns << ',' << r.iterations << ',' << r.relative_residual << ',' << r.seconds << '\n';
}

}  // namespace vxm
