#include "escat/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace escat {

std::string fnv1a_digest(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void atomic_write(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + tmp);
    out << content;
    if (!out) throw std::runtime_error("write failed: " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw std::runtime_error("rename failed: " + tmp + " -> " + path);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt9(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

// Line-oriented reader with position tracking for error messages.
struct LineReader {
  std::string path;
  std::istringstream in;
  int line_no = 0;

  LineReader(const std::string& p, const std::string& content) : path(p), in(content) {}

  bool next(std::string& line) {
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line[0] == '#') continue;
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(path, line_no, msg); }

  std::string expect(const std::string& key) {
    std::string line;
    if (!next(line)) fail("unexpected end of file, expected '" + key + "'");
    if (line.rfind(key + " ", 0) != 0 && line != key)
      fail("expected '" + key + "', got '" + line + "'");
    return line.size() > key.size() ? line.substr(key.size() + 1) : std::string();
  }
};

std::vector<double> parse_doubles(LineReader& r, const std::string& text, size_t expected) {
  std::istringstream ss(text);
  std::vector<double> out;
  double v;
  while (ss >> v) out.push_back(v);
  if (expected != 0 && out.size() != expected)
    r.fail("expected " + std::to_string(expected) + " numbers, got " +
           std::to_string(out.size()));
  return out;
}

void write_wave_block(std::ostringstream& out, const Material& m, const IncidentWave& w) {
  out << "material.lambda " << fmt(m.lambda) << "\n";
  out << "material.mu " << fmt(m.mu) << "\n";
  out << "wave.d " << fmt(w.d[0]) << ' ' << fmt(w.d[1]) << ' ' << fmt(w.d[2]) << "\n";
  out << "wave.dperp " << fmt(w.dperp[0]) << ' ' << fmt(w.dperp[1]) << ' ' << fmt(w.dperp[2])
      << "\n";
  out << "wave.alpha " << fmt(w.alpha.real()) << ' ' << fmt(w.alpha.imag()) << "\n";
  out << "wave.beta " << fmt(w.beta.real()) << ' ' << fmt(w.beta.imag()) << "\n";
  out << "wave.omega " << fmt(w.omega) << "\n";
}

void read_wave_block(LineReader& r, Material& m, IncidentWave& w) {
  m.lambda = parse_doubles(r, r.expect("material.lambda"), 1)[0];
  m.mu = parse_doubles(r, r.expect("material.mu"), 1)[0];
  m.validate();
  auto d = parse_doubles(r, r.expect("wave.d"), 3);
  auto dp = parse_doubles(r, r.expect("wave.dperp"), 3);
  auto al = parse_doubles(r, r.expect("wave.alpha"), 2);
  auto be = parse_doubles(r, r.expect("wave.beta"), 2);
  const double omega = parse_doubles(r, r.expect("wave.omega"), 1)[0];
  w = IncidentWave(Vector3(d[0], d[1], d[2]), Vector3(dp[0], dp[1], dp[2]),
                   Complex(al[0], al[1]), Complex(be[0], be[1]), omega);
}

void append_values_block(std::ostringstream& out, const FarField& f, bool with_grid_columns) {
  for (int n = 0; n < f.size(); ++n) {
    if (with_grid_columns)
      out << fmt(f.grid->polar[n]) << ' ' << fmt(f.grid->azimuth[n]) << ' '
          << fmt(f.grid->weights[n]) << ' ';
    for (int c = 0; c < 3; ++c)
      out << fmt(f.values(c, n).real()) << ' ' << fmt(f.values(c, n).imag())
          << (c == 2 ? "" : " ");
    out << "\n";
  }
}

}  // namespace

void write_farfield(const std::string& path, const FarField& f) {
  if (!f.grid || f.grid->size() == 0)
    throw std::invalid_argument("write_farfield: field has no grid");
  std::ostringstream out;
  out << "escat-farfield 1\n";
  write_wave_block(out, f.meta.material, f.meta.wave);
  out << "grid " << f.grid->n_polar << ' ' << f.grid->n_azimuth << "\n";
  out << "normalization " << f.meta.normalization << "\n";
  out << "provenance " << f.meta.provenance << "\n";
  out << "noise.level " << fmt(f.meta.noise.level) << "\n";
  out << "noise.seed " << f.meta.noise.seed << "\n";
  out << "noise.applied " << (f.meta.noise.applied ? 1 : 0) << "\n";
  out << "config.digest " << (f.meta.config_digest.empty() ? "-" : f.meta.config_digest)
      << "\n";
  out << "nodes " << f.size() << "\n";
  append_values_block(out, f, true);
  atomic_write(path, out.str());
}

FarField read_farfield(const std::string& path) {
  LineReader r(path, read_file(path));
  {
    std::string magic = r.expect("escat-farfield");
    if (magic != "1") r.fail("unsupported far-field format version '" + magic + "'");
  }
  FarField f;
  read_wave_block(r, f.meta.material, f.meta.wave);
  const auto gdims = parse_doubles(r, r.expect("grid"), 2);
  f.meta.normalization = r.expect("normalization");
  f.meta.provenance = r.expect("provenance");
  f.meta.noise.level = parse_doubles(r, r.expect("noise.level"), 1)[0];
  f.meta.noise.seed = static_cast<std::uint64_t>(parse_doubles(r, r.expect("noise.seed"), 1)[0]);
  f.meta.noise.applied = parse_doubles(r, r.expect("noise.applied"), 1)[0] != 0.0;
  {
    const std::string dg = r.expect("config.digest");
    f.meta.config_digest = dg == "-" ? "" : dg;
  }
  const int nodes = static_cast<int>(parse_doubles(r, r.expect("nodes"), 1)[0]);
  const int np = static_cast<int>(gdims[0]);
  const int na = static_cast<int>(gdims[1]);
  if (nodes <= 0) r.fail("far field must have at least one node");
  if (nodes != np * na) r.fail("node count disagrees with the grid header");

  auto grid = shared_sphere_grid(np, na);
  f.grid = grid;
  f.values.resize(3, nodes);
  for (int n = 0; n < nodes; ++n) {
    std::string line;
    if (!r.next(line)) r.fail("truncated file: node record " + std::to_string(n) + " missing");
    const auto v = parse_doubles(r, line, 9);
    if (std::abs(v[0] - grid->polar[n]) > 1e-9 || std::abs(v[1] - grid->azimuth[n]) > 1e-9 ||
        std::abs(v[2] - grid->weights[n]) > 1e-9)
      r.fail("node record disagrees with the grid header");
    for (int c = 0; c < 3; ++c) f.values(c, n) = Complex(v[3 + 2 * c], v[4 + 2 * c]);
  }
  return f;
}

void write_library(const std::string& path, const ReferenceLibrary& lib,
                   const std::vector<PolarizationTensor>& polarization_cache) {
  if (!lib.grid || lib.entries.empty())
    throw std::invalid_argument("write_library: empty library");
  std::ostringstream out;
  out << "escat-library 1\n";
  write_wave_block(out, lib.material, lib.wave);
  out << "grid " << lib.grid->n_polar << ' ' << lib.grid->n_azimuth << "\n";
  out << "audit.threshold " << fmt(lib.audit.threshold) << "\n";
  out << "audit.min_gap " << fmt(lib.audit.min_gap) << "\n";
  out << "audit.pair " << lib.audit.entry_a << ' ' << lib.audit.entry_b << "\n";
  out << "audit.pass " << (lib.audit.pass ? 1 : 0) << "\n";
  out << "shapes " << lib.shapes.size() << "\n";
  for (size_t i = 0; i < lib.shapes.size(); ++i)
    out << "shape " << i << ' ' << lib.shapes[i].name << "\n";
  out << "rotations " << lib.rotation_net.size() << "\n";
  for (size_t i = 0; i < lib.rotation_net.size(); ++i)
    out << "rotation " << i << ' ' << fmt(lib.rotation_net[i][0]) << ' '
        << fmt(lib.rotation_net[i][1]) << ' ' << fmt(lib.rotation_net[i][2]) << "\n";
  out << "scales " << lib.scale_net.size() << "\n";
  for (size_t i = 0; i < lib.scale_net.size(); ++i)
    out << "scale " << i << ' ' << fmt(lib.scale_net[i]) << "\n";
  out << "entries " << lib.entries.size() << "\n";
  for (const auto& e : lib.entries) {
    out << "entry " << e.shape_index << ' ' << e.rotation_index << ' ' << e.scale_index << ' '
        << fmt(e.norm_build_wave) << ' ' << fmt(e.residual_pressure) << ' '
        << fmt(e.residual_shear) << "\n";
    append_values_block(out, e.sig_pressure, false);
    append_values_block(out, e.sig_shear, false);
  }
  out << "polarization " << polarization_cache.size() << "\n";
  for (const auto& p : polarization_cache) {
    out << "pol " << p.shape_name << ' ' << fmt(p.scale);
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        out << ' ' << fmt(p.matrix(a, b).real()) << ' ' << fmt(p.matrix(a, b).imag());
    out << "\n";
  }
  atomic_write(path, out.str());
}

LibraryFile read_library(const std::string& path) {
  LineReader r(path, read_file(path));
  {
    std::string magic = r.expect("escat-library");
    if (magic != "1") r.fail("unsupported library format version '" + magic + "'");
  }
  LibraryFile lf;
  ReferenceLibrary& lib = lf.library;
  read_wave_block(r, lib.material, lib.wave);
  const auto gdims = parse_doubles(r, r.expect("grid"), 2);
  auto grid = shared_sphere_grid(static_cast<int>(gdims[0]), static_cast<int>(gdims[1]));
  lib.grid = grid;
  lib.audit.threshold = parse_doubles(r, r.expect("audit.threshold"), 1)[0];
  lib.audit.min_gap = parse_doubles(r, r.expect("audit.min_gap"), 1)[0];
  {
    const auto pair = parse_doubles(r, r.expect("audit.pair"), 2);
    lib.audit.entry_a = static_cast<int>(pair[0]);
    lib.audit.entry_b = static_cast<int>(pair[1]);
  }
  lib.audit.pass = parse_doubles(r, r.expect("audit.pass"), 1)[0] != 0.0;

  const int n_shapes = static_cast<int>(parse_doubles(r, r.expect("shapes"), 1)[0]);
  for (int i = 0; i < n_shapes; ++i) {
    std::istringstream ss(r.expect("shape"));
    int idx;
    std::string name;
    if (!(ss >> idx >> name) || idx != i) r.fail("malformed shape record");
    lib.shapes.push_back(make_shape(name));
  }
  const int n_rot = static_cast<int>(parse_doubles(r, r.expect("rotations"), 1)[0]);
  for (int i = 0; i < n_rot; ++i) {
    const auto v = parse_doubles(r, r.expect("rotation"), 4);
    if (static_cast<int>(v[0]) != i) r.fail("malformed rotation record");
    lib.rotation_net.emplace_back(v[1], v[2], v[3]);
  }
  const int n_sc = static_cast<int>(parse_doubles(r, r.expect("scales"), 1)[0]);
  for (int i = 0; i < n_sc; ++i) {
    const auto v = parse_doubles(r, r.expect("scale"), 2);
    if (static_cast<int>(v[0]) != i) r.fail("malformed scale record");
    lib.scale_net.push_back(v[1]);
  }

  const IncidentWave wave_p(lib.wave.d, lib.wave.dperp, Complex(1.0), Complex(0.0),
                            lib.wave.omega);
  const IncidentWave wave_s(lib.wave.d, lib.wave.dperp, Complex(0.0), Complex(1.0),
                            lib.wave.omega);

  const int n_entries = static_cast<int>(parse_doubles(r, r.expect("entries"), 1)[0]);
  const int nodes = grid->size();
  for (int i = 0; i < n_entries; ++i) {
    const auto h = parse_doubles(r, r.expect("entry"), 6);
    LibraryEntry e;
    e.shape_index = static_cast<int>(h[0]);
    e.rotation_index = static_cast<int>(h[1]);
    e.scale_index = static_cast<int>(h[2]);
    if (e.shape_index < 0 || e.shape_index >= n_shapes || e.rotation_index < 0 ||
        e.rotation_index >= n_rot || e.scale_index < 0 || e.scale_index >= n_sc)
      r.fail("entry indices out of range");
    e.norm_build_wave = h[3];
    e.residual_pressure = h[4];
    e.residual_shear = h[5];
    e.shape = lib.shapes[e.shape_index].id;
    e.shape_name = lib.shapes[e.shape_index].name;
    e.euler = lib.rotation_net[e.rotation_index];
    e.scale = lib.scale_net[e.scale_index];
    for (FarField* sig : {&e.sig_pressure, &e.sig_shear}) {
      sig->grid = grid;
      sig->values.resize(3, nodes);
      sig->meta.material = lib.material;
      sig->meta.wave = (sig == &e.sig_pressure) ? wave_p : wave_s;
      sig->meta.provenance = "library";
      for (int n = 0; n < nodes; ++n) {
        std::string line;
        if (!r.next(line)) r.fail("truncated library entry");
        const auto v = parse_doubles(r, line, 6);
        for (int c = 0; c < 3; ++c) sig->values(c, n) = Complex(v[2 * c], v[2 * c + 1]);
      }
    }
    lib.entries.push_back(std::move(e));
  }

  const int n_pol = static_cast<int>(parse_doubles(r, r.expect("polarization"), 1)[0]);
  for (int i = 0; i < n_pol; ++i) {
    std::istringstream ss(r.expect("pol"));
    std::string name;
    double scale;
    if (!(ss >> name >> scale)) r.fail("malformed polarization record");
    PolarizationTensor p;
    p.shape_name = name;
    p.shape = shape_from_name(name);
    p.scale = scale;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        double re, im;
        if (!(ss >> re >> im)) r.fail("malformed polarization record");
        p.matrix(a, b) = Complex(re, im);
      }
    lf.polarization_cache.push_back(std::move(p));
  }
  return lf;
}

void write_indicator_csv(const std::string& path, const IndicatorField& field,
                         const std::string& config_digest) {
  std::ostringstream out;
  out << "# escat indicator volume\n";
  out << "# mode " << indicator_mode_name(field.mode) << "\n";
  out << "# provenance " << field.provenance << "\n";
  if (!config_digest.empty()) out << "# config " << config_digest << "\n";
  const auto d = field.mesh.dims();
  out << "# mesh " << fmt(field.mesh.lo[0]) << ' ' << fmt(field.mesh.lo[1]) << ' '
      << fmt(field.mesh.lo[2]) << ' ' << fmt(field.mesh.hi[0]) << ' ' << fmt(field.mesh.hi[1])
      << ' ' << fmt(field.mesh.hi[2]) << ' ' << fmt(field.mesh.spacing) << "\n";
  out << "x,y,z,value\n";
  double vmax = 0.0;
  Vector3 amax = field.mesh.lo;
  std::size_t i = 0;
  for (int ix = 0; ix < d[0]; ++ix)
    for (int iy = 0; iy < d[1]; ++iy)
      for (int iz = 0; iz < d[2]; ++iz, ++i) {
        const Vector3 p = field.mesh.point(ix, iy, iz);
        const double v = field.values[i];
        out << fmt9(p[0]) << ',' << fmt9(p[1]) << ',' << fmt9(p[2]) << ',' << fmt9(v) << "\n";
        if (v > vmax) {
          vmax = v;
          amax = p;
        }
      }
  out << "# max " << fmt9(vmax) << " at " << fmt9(amax[0]) << ' ' << fmt9(amax[1]) << ' '
      << fmt9(amax[2]) << "\n";
  atomic_write(path, out.str());
}

void write_indicator_vtk(const std::string& path, const IndicatorField& field) {
  const auto d = field.mesh.dims();
  std::ostringstream out;
  out << "# vtk DataFile Version 3.0\n";
  out << "escat indicator volume (" << field.provenance << ")\n";
  out << "ASCII\nDATASET STRUCTURED_POINTS\n";
  out << "DIMENSIONS " << d[0] << ' ' << d[1] << ' ' << d[2] << "\n";
  out << "ORIGIN " << fmt9(field.mesh.lo[0]) << ' ' << fmt9(field.mesh.lo[1]) << ' '
      << fmt9(field.mesh.lo[2]) << "\n";
  out << "SPACING " << fmt9(field.mesh.spacing) << ' ' << fmt9(field.mesh.spacing) << ' '
      << fmt9(field.mesh.spacing) << "\n";
  out << "POINT_DATA " << field.values.size() << "\n";
  out << "SCALARS indicator double 1\nLOOKUP_TABLE default\n";
  // Legacy structured points run x fastest.
  for (int iz = 0; iz < d[2]; ++iz)
    for (int iy = 0; iy < d[1]; ++iy)
      for (int ix = 0; ix < d[0]; ++ix)
        out << fmt9(field.values[field.mesh.index(ix, iy, iz)]) << "\n";
  atomic_write(path, out.str());
}

void write_scene(const std::string& path, const Scene& scene) {
  std::ostringstream out;
  out << "# escat scene\n";
  out << "class " << scene_class_name(scene.cls) << "\n";
  for (const auto& c : scene.components) {
    const auto& p = c.placement;
    out << "component shape=" << c.shape.name << " pos=" << fmt(p.position[0]) << ','
        << fmt(p.position[1]) << ',' << fmt(p.position[2]) << " euler=" << fmt(p.euler[0])
        << ',' << fmt(p.euler[1]) << ',' << fmt(p.euler[2]) << " scale=" << fmt(p.scale)
        << "\n";
  }
  atomic_write(path, out.str());
}

namespace {

Vector3 parse_vec3_csv(LineReader& r, const std::string& text) {
  Vector3 v;
  char c1, c2;
  std::istringstream ss(text);
  if (!(ss >> v[0] >> c1 >> v[1] >> c2 >> v[2]) || c1 != ',' || c2 != ',')
    r.fail("expected three comma-separated numbers, got '" + text + "'");
  return v;
}

}  // namespace

Scene read_scene(const std::string& path) {
  LineReader r(path, read_file(path));
  Scene scene;
  std::string line;
  bool have_class = false;
  while (r.next(line)) {
    std::istringstream ss(line);
    std::string head;
    ss >> head;
    if (head == "class") {
      std::string name;
      if (!(ss >> name)) r.fail("missing scene class");
      scene.cls = scene_class_from_name(name);
      have_class = true;
    } else if (head == "component") {
      SceneComponent comp;
      Placement& p = comp.placement;
      bool have_shape = false;
      std::string kv;
      while (ss >> kv) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) r.fail("component tokens must be key=value: " + kv);
        const std::string key = kv.substr(0, eq);
        const std::string val = kv.substr(eq + 1);
        if (key == "shape") {
          comp.shape = make_shape(val);
          have_shape = true;
        } else if (key == "pos") {
          p.position = parse_vec3_csv(r, val);
        } else if (key == "euler") {
          p.euler = parse_vec3_csv(r, val);
        } else if (key == "scale") {
          p.scale = std::stod(val);
        } else {
          r.fail("unknown component key: " + key);
        }
      }
      if (!have_shape) r.fail("component without shape");
      p.validate();
      scene.components.push_back(std::move(comp));
    } else {
      r.fail("unknown scene directive: " + head);
    }
  }
  if (!have_class) throw ParseError(path, r.line_no, "scene file missing class line");
  return scene;
}

LibrarySpec read_libspec(const std::string& path) {
  LineReader r(path, read_file(path));
  LibrarySpec spec;
  std::string line;
  while (r.next(line)) {
    std::istringstream ss(line);
    std::string head, rest;
    ss >> head;
    std::getline(ss, rest);
    const auto a = rest.find_first_not_of(" \t");
    rest = a == std::string::npos ? std::string() : rest.substr(a);
    if (head == "shape") {
      spec.shapes.push_back(make_shape(rest));
    } else if (head == "rotation") {
      spec.rotations.push_back(parse_vec3_csv(r, rest));
    } else if (head == "scale") {
      spec.scales.push_back(std::stod(rest));
    } else {
      r.fail("unknown libspec directive: " + head);
    }
  }
  if (spec.shapes.empty() || spec.scales.empty())
    throw ParseError(path, r.line_no, "libspec needs at least one shape and one scale");
  return spec;
}

void write_detections(const std::string& path, const std::vector<Detection>& detections,
                      const std::string& config_digest) {
  std::ostringstream out;
  out << "# escat detections\n";
  if (!config_digest.empty()) out << "# config " << config_digest << "\n";
  out << "# count " << detections.size() << "\n";
  out << "# columns: x y z peak [shape theta phi psi scale]\n";
  for (const auto& det : detections) {
    out << fmt9(det.position[0]) << ' ' << fmt9(det.position[1]) << ' '
        << fmt9(det.position[2]) << ' ' << fmt9(det.peak_value);
    if (det.entry) {
      out << ' ' << det.entry->shape_name << ' ' << fmt9(det.entry->euler[0]) << ' '
          << fmt9(det.entry->euler[1]) << ' ' << fmt9(det.entry->euler[2]) << ' '
          << fmt9(det.entry->scale);
    }
    out << "\n";
  }
  atomic_write(path, out.str());
}

ExperimentConfig read_config(const std::string& path) {
  const std::string bytes = read_file(path);
  LineReader r(path, bytes);
  ExperimentConfig cfg;
  cfg.digest = fnv1a_digest(bytes);

  double lambda = cfg.material.lambda, mu = cfg.material.mu;
  Vector3 d = cfg.wave.d, dperp = cfg.wave.dperp;
  Complex alpha = cfg.wave.alpha, beta = cfg.wave.beta;
  double omega = cfg.wave.omega;

  std::string line;
  while (r.next(line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) r.fail("expected 'key = value', got '" + line + "'");
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t");
      const auto b = s.find_last_not_of(" \t");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    auto as_double = [&]() { return std::stod(val); };
    auto as_int = [&]() { return std::stoi(val); };
    auto as_vec3 = [&]() { return parse_vec3_csv(r, val); };
    auto as_complex = [&]() {
      const auto comma = val.find(',');
      if (comma == std::string::npos) return Complex(std::stod(val), 0.0);
      return Complex(std::stod(val.substr(0, comma)), std::stod(val.substr(comma + 1)));
    };

    if (key == "lambda") lambda = as_double();
    else if (key == "mu") mu = as_double();
    else if (key == "omega") omega = as_double();
    else if (key == "d") d = as_vec3();
    else if (key == "dperp") dperp = as_vec3();
    else if (key == "alpha") alpha = as_complex();
    else if (key == "beta") beta = as_complex();
    else if (key == "grid.polar") cfg.grid_polar = as_int();
    else if (key == "grid.azimuth") cfg.grid_azimuth = as_int();
    else if (key == "mfs.sources") cfg.mfs.n_sources = as_int();
    else if (key == "mfs.collocation") cfg.mfs.n_collocation = as_int();
    else if (key == "mfs.aux_scale") cfg.mfs.auxiliary_scale = as_double();
    else if (key == "mfs.svd_cutoff") cfg.mfs.svd_cutoff = as_double();
    else if (key == "mfs.residual_tol") cfg.mfs.residual_tolerance = as_double();
    else if (key == "mesh.lo") cfg.mesh.lo = as_vec3();
    else if (key == "mesh.hi") cfg.mesh.hi = as_vec3();
    else if (key == "mesh.spacing") cfg.mesh.spacing = as_double();
    else if (key == "noise.level") cfg.noise_level = as_double();
    else if (key == "noise.seed") cfg.noise_seed = static_cast<std::uint64_t>(std::stoull(val));
    else if (key == "scheme") cfg.scheme = val;
    else if (key == "mode") cfg.mode = indicator_mode_from_name(val);
    else if (key == "threshold") cfg.threshold = as_double();
    else if (key == "min_separation") cfg.min_separation = as_double();
    else if (key == "tuning.pos_radius") cfg.tuning.pos_radius = as_double();
    else if (key == "tuning.pos_step") cfg.tuning.pos_step = as_double();
    else if (key == "tuning.rotation_span") cfg.tuning.rotation_span = as_int();
    else if (key == "tuning.scale_span") cfg.tuning.scale_span = as_int();
    else if (key == "tuning.axis_offsets_only")
      cfg.tuning.axis_offsets_only = as_int() != 0;
    else if (key == "foldy.surface") cfg.foldy_surface = as_int();
    else if (key == "solver") cfg.solver = val;
    else if (key == "library") cfg.library_path = val;
    else if (key == "scene") cfg.scene_path = val;
    else r.fail("unknown config key: " + key);
  }

  cfg.material = Material(lambda, mu);
  cfg.wave = IncidentWave(d, dperp, alpha, beta, omega);
  cfg.mfs.validate();
  cfg.mesh.validate();
  if (cfg.scheme != "s" && cfg.scheme != "r" && cfg.scheme != "m")
    throw ParseError(path, 0, "scheme must be one of s, r, m");
  if (cfg.solver != "auto" && cfg.solver != "mfs" && cfg.solver != "foldy")
    throw ParseError(path, 0, "solver must be one of auto, mfs, foldy");

  for (const auto& ref : {cfg.library_path, cfg.scene_path})
    if (ref && !std::ifstream(*ref))
      throw ParseError(path, 0, "referenced file does not exist: " + *ref);
  return cfg;
}

}  // namespace escat
