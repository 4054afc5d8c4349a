#include "escat/imaging.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace escat {

void SamplingMesh::validate() const {
  if (!(spacing > 0.0)) throw std::invalid_argument("SamplingMesh: spacing must be positive");
  for (int a = 0; a < 3; ++a)
    if (hi[a] < lo[a]) throw std::invalid_argument("SamplingMesh: empty box");
}

std::array<int, 3> SamplingMesh::dims() const {
  validate();
  std::array<int, 3> d;
  for (int a = 0; a < 3; ++a)
    d[a] = 1 + static_cast<int>(std::floor((hi[a] - lo[a]) / spacing + 1e-9));
  return d;
}

std::size_t SamplingMesh::size() const {
  const auto d = dims();
  return static_cast<std::size_t>(d[0]) * d[1] * d[2];
}

double IndicatorField::max_value() const {
  double m = 0.0;
  for (double v : values) m = std::max(m, v);
  return m;
}

Vector3 IndicatorField::argmax() const {
  const auto d = mesh.dims();
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] > values[best]) best = i;
  const int iz = static_cast<int>(best % d[2]);
  const int iy = static_cast<int>((best / d[2]) % d[1]);
  const int ix = static_cast<int>(best / (static_cast<std::size_t>(d[1]) * d[2]));
  return mesh.point(ix, iy, iz);
}

std::string indicator_mode_name(IndicatorMode m) {
  switch (m) {
    case IndicatorMode::P: return "p";
    case IndicatorMode::S: return "s";
    case IndicatorMode::Full: return "full";
  }
  return "full";
}

IndicatorMode indicator_mode_from_name(const std::string& name) {
  if (name == "p" || name == "P") return IndicatorMode::P;
  if (name == "s" || name == "S") return IndicatorMode::S;
  if (name == "full" || name == "Full" || name == "f") return IndicatorMode::Full;
  throw std::invalid_argument("unknown indicator mode: " + name);
}

namespace {

// Per-axis tables of exp(i k xhat[a] * lattice value): the phase at mesh
// point (ix,iy,iz) is the product of three table entries.
struct PhaseTables {
  int nn = 0;
  std::array<int, 3> d{};
  std::vector<Complex> t[3];

  PhaseTables(const SphereGrid& grid, const SamplingMesh& mesh, double k) {
    nn = grid.size();
    d = mesh.dims();
    for (int a = 0; a < 3; ++a) {
      t[a].resize(static_cast<std::size_t>(nn) * d[a]);
      for (int n = 0; n < nn; ++n) {
        const double kx = k * grid.nodes[n][a];
        for (int i = 0; i < d[a]; ++i)
          t[a][static_cast<std::size_t>(n) * d[a] + i] =
              std::exp(iu * (kx * (mesh.lo[a] + mesh.spacing * i)));
      }
    }
  }

  const Complex* row(int axis, int node) const {
    return t[axis].data() + static_cast<std::size_t>(node) * d[axis];
  }
};

// Accumulate acc_c[z] += coeff_cary[n] * prod_a table(n, z_a) over all nodes,
// for `nc` independent complex coefficient channels sharing the same phases.
void accumulate_channels(const PhaseTables& pt, const std::vector<const Complex*>& coeffs,
                         std::vector<std::vector<Complex>>& acc) {
  const auto [nx, ny, nz] = pt.d;
  const int nc = static_cast<int>(coeffs.size());
  for (int n = 0; n < pt.nn; ++n) {
    const Complex* tx = pt.row(0, n);
    const Complex* ty = pt.row(1, n);
    const Complex* tz = pt.row(2, n);
    for (int ix = 0; ix < nx; ++ix) {
      const Complex ex = tx[ix];
      for (int iy = 0; iy < ny; ++iy) {
        const Complex exy = ex * ty[iy];
        const std::size_t base = (static_cast<std::size_t>(ix) * ny + iy) * nz;
        for (int c = 0; c < nc; ++c) {
          const Complex v = coeffs[c][n] * exy;
          Complex* out = acc[c].data() + base;
          for (int iz = 0; iz < nz; ++iz) out[iz] += v * tz[iz];
        }
      }
    }
  }
}

void require_data(const FarField& f) {
  if (!f.grid || f.grid->size() == 0 || f.values.cols() != f.grid->size())
    throw std::invalid_argument("indicator: far field has no grid");
}

constexpr double kernel_norm_p = 4.0 * pi / 3.0;
constexpr double kernel_norm_s = 8.0 * pi / 3.0;
constexpr double kernel_norm_full = 4.0 * pi;

}  // namespace

IndicatorField indicator_small(const FarField& f, const SamplingMesh& mesh,
                               IndicatorMode mode) {
  require_data(f);
  mesh.validate();
  const WaveNumbers k = f.wavenumbers_of();
  const int nn = f.grid->size();
  const std::size_t np = mesh.size();

  const bool need_p = mode != IndicatorMode::S;
  const bool need_s = mode != IndicatorMode::P;

  // Node coefficients: radial scalar s_n = w_n (u . x), tangential vector
  // t_n = w_n u - s_n x; P/S data norms come along for free.
  std::vector<Complex> sp(nn);
  Eigen::Matrix3Xcd tv(3, nn);
  double norm_p = 0.0, norm_s = 0.0;
  for (int n = 0; n < nn; ++n) {
    const Vector3& x = f.grid->nodes[n];
    const double w = f.grid->weights[n];
    const Vector3c u = f.values.col(n);
    const Complex radial = x.cast<Complex>().dot(u);
    sp[n] = w * radial;
    tv.col(n) = w * u - sp[n] * x.cast<Complex>();
    norm_p += w * std::norm(radial);
    norm_s += w * (u - radial * x.cast<Complex>()).squaredNorm();
  }

  double data_norm = 0.0;
  switch (mode) {
    case IndicatorMode::P: data_norm = norm_p; break;
    case IndicatorMode::S: data_norm = norm_s; break;
    case IndicatorMode::Full: data_norm = norm_p + norm_s; break;
  }
  if (data_norm <= 0.0) throw std::invalid_argument("indicator_small: zero data norm");

  // Channel coefficients: P channels carry s_n * xhat e^{i kp x.z}, S
  // channels carry t_n e^{i ks x.z}.
  Eigen::Matrix3Xcd pv(3, nn);
  for (int n = 0; n < nn; ++n) pv.col(n) = sp[n] * f.grid->nodes[n].cast<Complex>();

  std::vector<std::vector<Complex>> accP, accT;
  if (need_p) {
    PhaseTables ptp(*f.grid, mesh, k.kp);
    std::vector<Complex> row0(nn), row1(nn), row2(nn);
    for (int n = 0; n < nn; ++n) {
      row0[n] = pv(0, n);
      row1[n] = pv(1, n);
      row2[n] = pv(2, n);
    }
    accP.assign(3, std::vector<Complex>(np, Complex(0, 0)));
    accumulate_channels(ptp, {row0.data(), row1.data(), row2.data()}, accP);
  }
  if (need_s) {
    PhaseTables pts(*f.grid, mesh, k.ks);
    std::vector<Complex> row0(nn), row1(nn), row2(nn);
    for (int n = 0; n < nn; ++n) {
      row0[n] = tv(0, n);
      row1[n] = tv(1, n);
      row2[n] = tv(2, n);
    }
    accT.assign(3, std::vector<Complex>(np, Complex(0, 0)));
    accumulate_channels(pts, {row0.data(), row1.data(), row2.data()}, accT);
  }

  IndicatorField out;
  out.mesh = mesh;
  out.mode = mode;
  out.provenance = "I-" + indicator_mode_name(mode);
  out.values.assign(np, 0.0);
  for (std::size_t i = 0; i < np; ++i) {
    double v = 0.0;
    switch (mode) {
      case IndicatorMode::P:
        for (int j = 0; j < 3; ++j) v += std::norm(accP[j][i]);
        v /= data_norm * kernel_norm_p;
        break;
      case IndicatorMode::S:
        for (int j = 0; j < 3; ++j) v += std::norm(accT[j][i]);
        v /= data_norm * kernel_norm_s;
        break;
      case IndicatorMode::Full:
        for (int j = 0; j < 3; ++j) v += std::norm(accP[j][i] + accT[j][i]);
        v /= data_norm * kernel_norm_full;
        break;
    }
    out.values[i] = v;
  }
  return out;
}

IndicatorField indicator_extended(const FarField& f, const LibraryEntry& entry,
                                  const SamplingMesh& mesh, IndicatorMode mode,
                                  const IncidentWave& wave) {
  require_data(f);
  require_data(entry.sig_pressure);
  require_data(entry.sig_shear);
  mesh.validate();
  if (!same_grid(*f.grid, *entry.sig_pressure.grid))
    throw std::invalid_argument("indicator_extended: entry grid differs from data grid");
  const WaveNumbers k = wavenumbers(f.meta.material, wave.omega);
  const int nn = f.grid->size();
  const std::size_t np = mesh.size();
  const Complex alpha = wave.alpha, beta = wave.beta;

  // Split data and signatures into radial/tangential parts node-wise.
  auto radial_of = [&](const FarField& g, int n) {
    return f.grid->nodes[n].cast<Complex>().dot(Vector3c(g.values.col(n)));
  };

  // Node coefficients of the four scalar kernel sums (a: pressure-incidence
  // signature, b: shear-incidence signature; P/S part of each).
  std::vector<Complex> gpa(nn), gpb(nn), gsa(nn), gsb(nn);
  double npa = 0.0, npb = 0.0, nsa = 0.0, nsb = 0.0;  // signature part norms^2
  Complex xp(0, 0), xs(0, 0);                         // <P10,P01>, <S10,S01>
  for (int n = 0; n < nn; ++n) {
    const Vector3c xc = f.grid->nodes[n].cast<Complex>();
    const double w = f.grid->weights[n];
    const Vector3c u = f.values.col(n);
    const Complex ur = radial_of(f, n);
    const Vector3c up = ur * xc;
    const Vector3c us = u - up;

    const Complex ar = radial_of(entry.sig_pressure, n);
    const Vector3c ap = ar * xc;
    const Vector3c as = Vector3c(entry.sig_pressure.values.col(n)) - ap;
    const Complex br = radial_of(entry.sig_shear, n);
    const Vector3c bp = br * xc;
    const Vector3c bs = Vector3c(entry.sig_shear.values.col(n)) - bp;

    // <f_p, alpha * P10 e^{...}> contributions: w * f_p . conj(alpha P10).
    gpa[n] = w * (alpha * ap).dot(up);  // conjugates the first factor
    gpb[n] = w * (beta * bp).dot(up);
    gsa[n] = w * (alpha * as).dot(us);
    gsb[n] = w * (beta * bs).dot(us);

    npa += w * (alpha * ap).squaredNorm();
    npb += w * (beta * bp).squaredNorm();
    nsa += w * (alpha * as).squaredNorm();
    nsb += w * (beta * bs).squaredNorm();
    xp += w * (beta * bp).dot(alpha * ap);
    xs += w * (beta * bs).dot(alpha * as);
  }

  if (f.values.norm() == 0.0)
    throw std::invalid_argument("indicator_extended: zero data norm");

  const double den_p_const = npa + npb;
  const double den_s_const = nsa + nsb;
  double check = 0.0;
  switch (mode) {
    case IndicatorMode::P: check = den_p_const; break;
    case IndicatorMode::S: check = den_s_const; break;
    case IndicatorMode::Full: check = den_p_const + den_s_const; break;
  }
  if (check <= 0.0) throw std::invalid_argument("indicator_extended: zero entry norm");

  const bool need_p = mode != IndicatorMode::S;
  const bool need_s = mode != IndicatorMode::P;
  const bool has_a = alpha != Complex(0.0);
  const bool has_b = beta != Complex(0.0);

  std::vector<std::vector<Complex>> accp, accs;
  if (need_p) {
    PhaseTables pt(*f.grid, mesh, k.kp);
    std::vector<const Complex*> ch;
    if (has_a) ch.push_back(gpa.data());
    if (has_b) ch.push_back(gpb.data());
    accp.assign(ch.size(), std::vector<Complex>(np, Complex(0, 0)));
    accumulate_channels(pt, ch, accp);
  }
  if (need_s) {
    PhaseTables pt(*f.grid, mesh, k.ks);
    std::vector<const Complex*> ch;
    if (has_a) ch.push_back(gsa.data());
    if (has_b) ch.push_back(gsb.data());
    accs.assign(ch.size(), std::vector<Complex>(np, Complex(0, 0)));
    accumulate_channels(pt, ch, accs);
  }

  IndicatorField out;
  out.mesh = mesh;
  out.mode = mode;
  out.provenance = "W-" + indicator_mode_name(mode) + ":" + entry.shape_name;
  out.values.assign(np, 0.0);

  const auto d = mesh.dims();
  std::size_t i = 0;
  for (int ix = 0; ix < d[0]; ++ix)
    for (int iy = 0; iy < d[1]; ++iy)
      for (int iz = 0; iz < d[2]; ++iz, ++i) {
        const Vector3 z = mesh.point(ix, iy, iz);
        const double dz = wave.d.dot(z);
        const Complex pre_a_p = std::exp(-iu * k.kp * dz);  // alpha term, P kernel
        const Complex pre_b_p = std::exp(-iu * k.ks * dz);  // beta term, P kernel
        // cross phase in ||A(z)||^2: e^{i(kp-ks) d.z}
        const Complex cross = std::exp(iu * (k.kp - k.ks) * dz);

        Complex num_p(0, 0), num_s(0, 0);
        if (need_p) {
          int c = 0;
          if (has_a) num_p += pre_a_p * accp[c++][i];
          if (has_b) num_p += pre_b_p * accp[c][i];
        }
        if (need_s) {
          int c = 0;
          if (has_a) num_s += pre_a_p * accs[c++][i];
          if (has_b) num_s += pre_b_p * accs[c][i];
        }
        const double den_p = den_p_const + 2.0 * (cross * xp).real();
        const double den_s = den_s_const + 2.0 * (cross * xs).real();

        double v = 0.0;
        switch (mode) {
          case IndicatorMode::P: v = std::norm(num_p) / (den_p * den_p); break;
          case IndicatorMode::S: v = std::norm(num_s) / (den_s * den_s); break;
          case IndicatorMode::Full: {
            const double den = den_p + den_s;
            v = std::norm(num_p + num_s) / (den * den);
            break;
          }
        }
        out.values[i] = v;
      }
  return out;
}

std::vector<Detection> extract_local_maxima(const IndicatorField& field, double threshold,
                                            double min_separation,
                                            const std::vector<std::uint8_t>& mask) {
  if (!(threshold > 0.0) || threshold > 1.0)
    throw std::invalid_argument("extract_local_maxima: threshold must be in (0, 1]");
  if (min_separation < field.mesh.spacing)
    throw std::invalid_argument("extract_local_maxima: min_separation below mesh spacing");
  if (!mask.empty() && mask.size() != field.values.size())
    throw std::invalid_argument("extract_local_maxima: mask size mismatch");

  const auto d = field.mesh.dims();
  const auto& v = field.values;
  std::vector<std::pair<double, std::array<int, 3>>> candidates;

  for (int ix = 0; ix < d[0]; ++ix)
    for (int iy = 0; iy < d[1]; ++iy)
      for (int iz = 0; iz < d[2]; ++iz) {
        const std::size_t i = field.mesh.index(ix, iy, iz);
        if (!mask.empty() && !mask[i]) continue;
        const double val = v[i];
        if (val < threshold) continue;
        bool strict_max = true;
        for (int ax = -1; ax <= 1 && strict_max; ++ax)
          for (int ay = -1; ay <= 1 && strict_max; ++ay)
            for (int az = -1; az <= 1 && strict_max; ++az) {
              if (ax == 0 && ay == 0 && az == 0) continue;
              const int jx = ix + ax, jy = iy + ay, jz = iz + az;
              if (jx < 0 || jy < 0 || jz < 0 || jx >= d[0] || jy >= d[1] || jz >= d[2])
                continue;
              if (v[field.mesh.index(jx, jy, jz)] >= val) strict_max = false;
            }
        if (strict_max) candidates.push_back({val, {ix, iy, iz}});
      }

  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });

  std::vector<Detection> out;
  for (const auto& [val, idx] : candidates) {
    const Vector3 p = field.mesh.point(idx[0], idx[1], idx[2]);
    bool suppressed = false;
    for (const auto& kept : out)
      if ((kept.position - p).norm() < min_separation) {
        suppressed = true;
        break;
      }
    if (!suppressed) out.push_back(Detection{p, val, std::nullopt});
  }
  return out;
}

namespace {

double auto_min_separation(const FarField& f, const SamplingMesh& mesh, double requested) {
  if (requested > 0.0) return std::max(requested, mesh.spacing);
  const WaveNumbers k = f.wavenumbers_of();
  return std::max(pi / k.ks, mesh.spacing);
}

std::vector<Detection> scheme_s_masked(const FarField& f, const SamplingMesh& mesh,
                                       const SchemeSOptions& options,
                                       const std::vector<std::uint8_t>& mask,
                                       IndicatorField* field_out) {
  const IndicatorField field = indicator_small(f, mesh, options.mode);
  double vmax = 0.0;
  for (std::size_t i = 0; i < field.values.size(); ++i)
    if (mask.empty() || mask[i]) vmax = std::max(vmax, field.values[i]);
  if (field_out) *field_out = field;
  if (vmax <= 0.0) return {};
  const double thr = std::min(1.0, options.relative_threshold * vmax);
  auto dets = extract_local_maxima(field, thr, auto_min_separation(f, mesh, options.min_separation),
                                   mask);
  return dets;
}

}  // namespace

std::vector<Detection> scheme_s(const FarField& f, const SamplingMesh& mesh,
                                const SchemeSOptions& options) {
  return scheme_s_masked(f, mesh, options, {}, nullptr);
}

std::vector<Detection> scheme_s(const FarField& f, const SamplingMesh& mesh,
                                const SchemeSOptions& options, IndicatorField* field_out) {
  return scheme_s_masked(f, mesh, options, {}, field_out);
}

SchemeRResult scheme_r(const FarField& f, const ReferenceLibrary& library,
                       const SamplingMesh& mesh, const SchemeROptions& options) {
  require_data(f);
  if (!library.grid || !same_grid(*f.grid, *library.grid))
    throw std::invalid_argument("scheme_r: data grid differs from library grid");
  if (library.entries.empty()) throw std::invalid_argument("scheme_r: empty library");
  const IncidentWave& wave = f.meta.wave;
  {
    const IncidentWave& lw = library.wave;
    if ((wave.d - lw.d).norm() > 1e-10 || (wave.dperp - lw.dperp).norm() > 1e-10 ||
        std::abs(wave.omega - lw.omega) > 1e-12 || wave.alpha != lw.alpha ||
        wave.beta != lw.beta)
      throw std::invalid_argument("scheme_r: library was built with a different wave");
  }

  SchemeRResult result;
  if (!library.audit.pass)
    result.warnings.push_back("library distinctness audit failed: min normalized gap " +
                              std::to_string(library.audit.min_gap) + " between entries " +
                              std::to_string(library.audit.entry_a) + " and " +
                              std::to_string(library.audit.entry_b));

  const double minsep = auto_min_separation(f, mesh, options.min_separation);
  FarField current = f;
  result.residual_norms.push_back(l2_norm(current));
  std::vector<std::uint8_t> mask(mesh.size(), 1);
  const auto d = mesh.dims();

  for (std::size_t j = 0; j < library.entries.size(); ++j) {
    const LibraryEntry& entry = library.entries[j];
    const IndicatorField field = indicator_extended(current, entry, mesh, options.mode, wave);
    const auto maxima = extract_local_maxima(field, options.w_threshold, minsep, mask);
    if (options.keep_fields) result.fields.push_back(field);
    if (maxima.empty()) continue;

    std::vector<Vector3> positions;
    for (const auto& m : maxima) {
      positions.push_back(m.position);
      Detection det = m;
      EntryRef ref;
      ref.library_index = static_cast<int>(j);
      ref.shape = entry.shape;
      ref.shape_name = entry.shape_name;
      ref.euler = entry.euler;
      ref.scale = entry.scale;
      ref.shape_index = entry.shape_index;
      ref.rotation_index = entry.rotation_index;
      ref.scale_index = entry.scale_index;
      det.entry = ref;
      result.detections.push_back(det);
    }

    // Remove the located bodies from the sampling mesh.
    const double radius = entry.scale * library.shapes[entry.shape_index].circumradius +
                          mesh.spacing;
    std::size_t i = 0;
    for (int ix = 0; ix < d[0]; ++ix)
      for (int iy = 0; iy < d[1]; ++iy)
        for (int iz = 0; iz < d[2]; ++iz, ++i) {
          if (!mask[i]) continue;
          const Vector3 z = mesh.point(ix, iy, iz);
          for (const auto& p : positions)
            if ((z - p).norm() <= radius) {
              mask[i] = 0;
              break;
            }
        }

    current = subtract_library_entry(current, entry, positions, wave);
    result.residual_norms.push_back(l2_norm(current));
  }
  return result;
}

namespace {

struct TuneCandidate {
  const LibraryEntry* entry = nullptr;
  Vector3 position = Vector3::Zero();
};

std::vector<Vector3> position_offsets(const TuningSpec& spec, double spacing) {
  const double radius = spec.pos_radius >= 0.0 ? spec.pos_radius : 0.5 * spacing;
  const double step = spec.pos_step > 0.0 ? spec.pos_step : 0.25 * spacing;
  const int m = static_cast<int>(std::floor(radius / step + 1e-9));
  std::vector<Vector3> out;
  out.push_back(Vector3::Zero());
  if (spec.axis_offsets_only) {
    for (int a = 0; a < 3; ++a)
      for (int i = 1; i <= m; ++i) {
        Vector3 v = Vector3::Zero();
        v[a] = i * step;
        out.push_back(v);
        out.push_back(-v);
      }
  } else {
    for (int ix = -m; ix <= m; ++ix)
      for (int iy = -m; iy <= m; ++iy)
        for (int iz = -m; iz <= m; ++iz) {
          if (ix == 0 && iy == 0 && iz == 0) continue;
          out.push_back(step * Vector3(ix, iy, iz));
        }
  }
  return out;
}

}  // namespace

SchemeMResult scheme_m(const FarField& f, const ReferenceLibrary& library,
                       const SamplingMesh& mesh, const SchemeROptions& r_options,
                       const SchemeSOptions& s_options, const TuningSpec& tuning) {
  SchemeMResult result;
  const SchemeRResult stage1 = scheme_r(f, library, mesh, r_options);
  result.warnings = stage1.warnings;

  if (stage1.detections.empty()) {
    result.small = scheme_s(f, mesh, s_options);
    result.small_only_fallback = true;
    return result;
  }

  const double step = tuning.pos_step > 0.0 ? tuning.pos_step : 0.25 * mesh.spacing;
  const std::vector<Vector3> offsets = position_offsets(tuning, mesh.spacing);

  // Candidate list per stage-1 component: library-net neighbors x offsets.
  const int n_comp = static_cast<int>(stage1.detections.size());
  std::vector<std::vector<TuneCandidate>> cands(n_comp);
  for (int l = 0; l < n_comp; ++l) {
    const EntryRef ref = *stage1.detections[l].entry;
    const int nrot = static_cast<int>(library.rotation_net.size());
    const int nsc = static_cast<int>(library.scale_net.size());
    for (int ri = std::max(0, ref.rotation_index - tuning.rotation_span);
         ri <= std::min(nrot - 1, ref.rotation_index + tuning.rotation_span); ++ri)
      for (int ci = std::max(0, ref.scale_index - tuning.scale_span);
           ci <= std::min(nsc - 1, ref.scale_index + tuning.scale_span); ++ci) {
        const LibraryEntry* e = library.find(ref.shape_index, ri, ci);
        if (!e) continue;
        for (const auto& off : offsets)
          cands[l].push_back({e, stage1.detections[l].position + off});
      }
  }

  // Exclude the tuning region from the stage-2 sampling mesh: the bodies,
  // their position neighborhoods, and half a shear wavelength of margin
  // (imperfect subtraction leaves sidelobes on that scale around a body).
  std::vector<std::uint8_t> mask(mesh.size(), 1);
  {
    const WaveNumbers kw = f.wavenumbers_of();
    const auto d = mesh.dims();
    std::size_t i = 0;
    for (int ix = 0; ix < d[0]; ++ix)
      for (int iy = 0; iy < d[1]; ++iy)
        for (int iz = 0; iz < d[2]; ++iz, ++i) {
          const Vector3 z = mesh.point(ix, iy, iz);
          for (int l = 0; l < n_comp; ++l) {
            const EntryRef& ref = *stage1.detections[l].entry;
            const double radius = ref.scale * library.shapes[ref.shape_index].circumradius +
                                  mesh.spacing + pi / kw.ks +
                                  (tuning.pos_radius >= 0.0 ? tuning.pos_radius
                                                            : 0.5 * mesh.spacing);
            if ((z - stage1.detections[l].position).norm() <= radius) {
              mask[i] = 0;
              break;
            }
          }
        }
  }

  // Enumerate tune-ups (product over components, capped).
  std::size_t total = 1;
  for (const auto& c : cands) total *= std::max<std::size_t>(1, c.size());
  std::vector<std::vector<TuneCandidate>> tuneups;
  if (total <= static_cast<std::size_t>(tuning.max_tuneups)) {
    std::vector<std::size_t> odo(n_comp, 0);
    while (true) {
      std::vector<TuneCandidate> t(n_comp);
      for (int l = 0; l < n_comp; ++l) t[l] = cands[l][odo[l]];
      tuneups.push_back(std::move(t));
      int l = n_comp - 1;
      while (l >= 0 && ++odo[l] == cands[l].size()) odo[l--] = 0;
      if (l < 0) break;
    }
  } else {
    // One component tuned at a time, the others held at their stage-1 cell.
    result.warnings.push_back("tune-up product exceeds max_tuneups; tuning per component");
    for (int l = 0; l < n_comp; ++l)
      for (const auto& cand : cands[l]) {
        std::vector<TuneCandidate> t(n_comp);
        for (int m = 0; m < n_comp; ++m) {
          if (m == l) {
            t[m] = cand;
          } else {
            const EntryRef& ref = *stage1.detections[m].entry;
            t[m] = {library.find(ref.shape_index, ref.rotation_index, ref.scale_index),
                    stage1.detections[m].position};
          }
        }
        tuneups.push_back(std::move(t));
      }
  }
  result.n_tuneups = static_cast<int>(tuneups.size());

  // Stage 2: subtract each tune-up, locate small scatterers, refine them on
  // the fine lattice and vote.
  struct Vote {
    int tuneup = -1;
    Vector3 position;
    double peak = 0.0;
  };
  std::map<std::array<long, 3>, std::vector<Vote>> bins;

  for (std::size_t ti = 0; ti < tuneups.size(); ++ti) {
    FarField residual = f;
    for (const auto& cand : tuneups[ti])
      residual = subtract_library_entry(residual, *cand.entry, {cand.position}, f.meta.wave);

    std::vector<Detection> dets;
    try {
      dets = scheme_s_masked(residual, mesh, s_options, mask, nullptr);
    } catch (const std::invalid_argument&) {
      continue;  // residual identically zero
    }

    for (const auto& det : dets) {
      SamplingMesh local;
      local.lo = det.position - Vector3::Constant(mesh.spacing);
      local.hi = det.position + Vector3::Constant(mesh.spacing);
      local.spacing = step;
      const IndicatorField fine = indicator_small(residual, local, s_options.mode);
      const Vector3 refined = fine.argmax();
      const double peak = fine.max_value();
      const std::array<long, 3> key{std::lround(refined[0] / step),
                                    std::lround(refined[1] / step),
                                    std::lround(refined[2] / step)};
      bins[key].push_back(Vote{static_cast<int>(ti), refined, peak});
    }
  }

  // Cluster votes: the refinement wobbles by about one fine step between
  // tune-ups, so a bin's support counts the tune-ups voting within one fine
  // step of it. Accept by descending support, suppressing neighbors.
  struct Cluster {
    std::array<long, 3> key;
    std::vector<int> supporters;
    double peak_sum = 0.0;
    int n_votes = 0;
    Vote best;
  };
  std::vector<Cluster> clusters;
  for (const auto& [key, votes] : bins) {
    Cluster c;
    c.key = key;
    c.best = votes.front();
    for (const auto& [okey, ovotes] : bins) {
      if (std::abs(okey[0] - key[0]) > 1 || std::abs(okey[1] - key[1]) > 1 ||
          std::abs(okey[2] - key[2]) > 1)
        continue;
      for (const auto& v : ovotes) {
        if (std::find(c.supporters.begin(), c.supporters.end(), v.tuneup) ==
            c.supporters.end())
          c.supporters.push_back(v.tuneup);
        c.peak_sum += v.peak;
        ++c.n_votes;
        if (v.peak > c.best.peak) c.best = v;
      }
    }
    clusters.push_back(std::move(c));
  }
  std::stable_sort(clusters.begin(), clusters.end(), [](const Cluster& a, const Cluster& b) {
    if (a.supporters.size() != b.supporters.size())
      return a.supporters.size() > b.supporters.size();
    return a.best.peak > b.best.peak;
  });

  const double need = tuning.vote_fraction * static_cast<double>(tuneups.size());
  std::vector<Cluster> accepted;
  for (const auto& c : clusters) {
    if (static_cast<double>(c.supporters.size()) <= need) continue;
    if (c.peak_sum / c.n_votes < tuning.vote_floor) continue;
    bool taken = false;
    for (const auto& a : accepted)
      if (std::abs(a.key[0] - c.key[0]) <= 2 && std::abs(a.key[1] - c.key[1]) <= 2 &&
          std::abs(a.key[2] - c.key[2]) <= 2) {
        taken = true;
        break;
      }
    if (!taken) accepted.push_back(c);
  }

  for (const auto& c : accepted)
    result.small.push_back(Detection{c.best.position, c.best.peak, std::nullopt});

  // The winning tune-up is the one generating the accepted maxima with the
  // sharpest peak; without accepted bins the stage-1 estimate stands.
  int winner = -1;
  double winner_peak = -1.0;
  for (const auto& c : accepted)
    if (c.best.peak > winner_peak) {
      winner_peak = c.best.peak;
      winner = c.best.tuneup;
    }

  result.extended = stage1.detections;
  if (winner >= 0) {
    for (int l = 0; l < n_comp; ++l) {
      const TuneCandidate& cand = tuneups[winner][l];
      result.extended[l].position = cand.position;
      EntryRef ref = *result.extended[l].entry;
      ref.euler = cand.entry->euler;
      ref.scale = cand.entry->scale;
      ref.rotation_index = cand.entry->rotation_index;
      ref.scale_index = cand.entry->scale_index;
      result.extended[l].entry = ref;
    }
  }
  return result;
}

std::array<double, 3> k_diagnostics(const FarField& component, const FarField& total) {
  const auto [cp, cs] = split_ps(component);
  const auto [tp, ts] = split_ps(total);
  const double np = l2_norm(tp), ns = l2_norm(ts), nf = l2_norm(total);
  if (np == 0.0 || ns == 0.0 || nf == 0.0)
    throw std::invalid_argument("k_diagnostics: zero total field norm");
  const double a = l2_norm(cp) / np;
  const double b = l2_norm(cs) / ns;
  const double c = l2_norm(component) / nf;
  return {a * a, b * b, c * c};
}

}  // namespace escat
