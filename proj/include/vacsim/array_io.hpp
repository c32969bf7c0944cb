#pragma once

// Self-describing array files: a text header of "key value" lines closed by "end",
// followed by the payload as little-endian IEEE f64 in row-major order.
//
//   vacsim-array 1
//   name signal_density
//   kind signal_density
//   units photons/sr
//   scenario_hash 0123456789abcdef
//   dtype f64le
//   shape 180 360
//   axis theta rad 0.00872664 0.0174533 180      (name unit first step count)
//   axis phi rad 0.00872664 0.0174533 360
//   attr key value
//   end

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "vacsim/emission.hpp"
#include "vacsim/error.hpp"

namespace vacsim {

struct ArrayAxis {
  std::string name, unit;
  double first = 0, step = 1;
  std::size_t count = 0;

  double at(std::size_t i) const { return first + double(i) * step; }
  bool operator==(const ArrayAxis&) const = default;
};

struct ArrayFile {
  std::string name, kind, units, scenario_hash;
  std::vector<std::size_t> shape;
  std::vector<ArrayAxis> axes; // one per dimension
  std::map<std::string, std::string> attrs;
  std::vector<double> data;

  std::size_t size() const {
    std::size_t n = 1;
    for (auto s : shape) n *= s;
    return n;
  }
  bool operator==(const ArrayFile&) const = default;
};

namespace array_detail {

inline bool single_token(const std::string& s) {
  return !s.empty() && s.find_first_of(" \t\r\n") == std::string::npos;
}

inline std::uint64_t to_le(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    std::uint64_t r = 0;
    for (int i = 0; i < 8; ++i) r |= ((v >> (8 * i)) & 0xff) << (8 * (7 - i));
    return r;
  }
  return v;
}

inline std::string fmt(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

} // namespace array_detail

inline void write_array(const std::string& path, const ArrayFile& a) {
  using namespace array_detail;
  if (a.data.size() != a.size()) throw ValidationError("array '" + a.name + "' payload does not match its shape");
  if (a.axes.size() != a.shape.size()) throw ValidationError("array '" + a.name + "' needs one axis per dimension");
  for (const auto* s : {&a.name, &a.kind, &a.units})
    if (!single_token(*s)) throw ValidationError("array header fields must be single tokens");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out << "vacsim-array 1\n";
  out << "name " << a.name << "\nkind " << a.kind << "\nunits " << a.units << "\n";
  out << "scenario_hash " << (a.scenario_hash.empty() ? "-" : a.scenario_hash) << "\n";
  out << "dtype f64le\nshape";
  for (auto s : a.shape) out << ' ' << s;
  out << '\n';
  for (std::size_t d = 0; d < a.axes.size(); ++d) {
    const auto& x = a.axes[d];
    if (!single_token(x.name) || !single_token(x.unit)) throw ValidationError("axis labels must be single tokens");
    if (x.count != a.shape[d]) throw ValidationError("axis '" + x.name + "' length does not match the shape");
    out << "axis " << x.name << ' ' << x.unit << ' ' << fmt(x.first) << ' ' << fmt(x.step) << ' ' << x.count << '\n';
  }
  for (const auto& [k, v] : a.attrs) {
    if (!single_token(k) || v.find('\n') != std::string::npos) throw ValidationError("bad attribute '" + k + "'");
    out << "attr " << k << ' ' << v << '\n';
  }
  out << "end\n";
  for (double v : a.data) {
    std::uint64_t u;
    std::memcpy(&u, &v, 8);
    u = to_le(u);
    out.write(reinterpret_cast<const char*>(&u), 8);
  }
  if (!out) throw IoError("failed while writing " + path);
}

inline ArrayFile read_array(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  ArrayFile a;
  std::string line;
  if (!std::getline(in, line) || line != "vacsim-array 1") throw IoError(path + " is not a vacsim array file");
  bool ended = false;
  while (std::getline(in, line)) {
    if (line == "end") {
      ended = true;
      break;
    }
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "name") ls >> a.name;
    else if (key == "kind") ls >> a.kind;
    else if (key == "units") ls >> a.units;
    else if (key == "scenario_hash") {
      ls >> a.scenario_hash;
      if (a.scenario_hash == "-") a.scenario_hash.clear();
    } else if (key == "dtype") {
      std::string t;
      ls >> t;
      if (t != "f64le") throw IoError(path + ": unsupported dtype " + t);
    } else if (key == "shape") {
      for (std::size_t s; ls >> s;) a.shape.push_back(s);
    } else if (key == "axis") {
      ArrayAxis x;
      ls >> x.name >> x.unit >> x.first >> x.step >> x.count;
      if (!ls) throw IoError(path + ": malformed axis line");
      a.axes.push_back(x);
    } else if (key == "attr") {
      std::string k, v;
      ls >> k;
      std::getline(ls >> std::ws, v);
      a.attrs[k] = v;
    } else {
      throw IoError(path + ": unknown header key '" + key + "'");
    }
  }
  if (!ended) throw IoError(path + ": header has no end marker");
  a.data.resize(a.size());
  for (auto& v : a.data) {
    std::uint64_t u;
    if (!in.read(reinterpret_cast<char*>(&u), 8)) throw IoError(path + ": payload shorter than the shape");
    u = array_detail::to_le(u);
    std::memcpy(&v, &u, 8);
  }
  if (in.peek() != EOF) throw IoError(path + ": trailing bytes after the payload");
  return a;
}

/// Long-format CSV: one column per axis coordinate, then the value.
inline void write_csv(const std::string& path, const ArrayFile& a) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  for (const auto& x : a.axes) out << x.name << '_' << x.unit << ',';
  out << a.name << '\n';
  out << std::setprecision(17);
  const std::size_t nd = a.shape.size();
  std::vector<std::size_t> idx(nd, 0);
  for (std::size_t flat = 0; flat < a.data.size(); ++flat) {
    for (std::size_t d = 0; d < nd; ++d) out << a.axes[d].at(idx[d]) << ',';
    out << a.data[flat] << '\n';
    for (std::size_t d = nd; d-- > 0;) {
      if (++idx[d] < a.shape[d]) break;
      idx[d] = 0;
    }
  }
  if (!out) throw IoError("failed while writing " + path);
}

// ---------------------------------------------------------------------------
// Conversions from library objects

inline ArrayAxis theta_axis(int n) { return {"theta", "rad", std::numbers::pi / n / 2, std::numbers::pi / n, std::size_t(n)}; }
inline ArrayAxis phi_axis(int n) { return {"phi", "rad", std::numbers::pi / n, 2 * std::numbers::pi / n, std::size_t(n)}; }

inline ArrayFile to_array(const AngularMap& m, const std::string& name, const std::string& hash) {
  ArrayFile a;
  a.name = name;
  a.kind = to_string(m.kind);
  a.units = m.kind == MapKind::discernible_mask ? "1" : "photons/sr";
  a.scenario_hash = hash;
  a.shape = {std::size_t(m.n_theta), std::size_t(m.n_phi)};
  a.axes = {theta_axis(m.n_theta), phi_axis(m.n_phi)};
  a.data = m.values;
  return a;
}

inline AngularMap angular_map_from(const ArrayFile& a) {
  if (a.shape.size() != 2) throw ValidationError("array '" + a.name + "' is not an angular map");
  AngularMap m(int(a.shape[0]), int(a.shape[1]), MapKind::signal_density);
  if (a.kind == "background_density") m.kind = MapKind::background_density;
  if (a.kind == "discernible_mask") m.kind = MapKind::discernible_mask;
  m.values = a.data;
  return m;
}

/// Amplitude as [polarization, omega, theta, phi, re/im], omega in units of the
/// reference frequency.
inline ArrayFile to_array(const SignalAmplitude& s, const std::string& name) {
  const SignalGrid& g = s.grid;
  ArrayFile a;
  a.name = name;
  a.kind = "signal_amplitude";
  a.units = "internal";
  a.scenario_hash = s.scenario_hash;
  a.shape = {2, std::size_t(g.n_omega), std::size_t(g.n_theta), std::size_t(g.n_phi), 2};
  a.axes = {{"polarization", "index", 1, 1, 2},
            {"omega", "omega_ref", g.omega_min, g.d_omega(), std::size_t(g.n_omega)},
            theta_axis(g.n_theta),
            phi_axis(g.n_phi),
            {"part", "re_im", 0, 1, 2}};
  a.attrs["channel"] = s.channel;
  a.data.reserve(a.size());
  for (int p = 0; p < 2; ++p)
    for (const auto& v : s.S[p]) {
      a.data.push_back(v.real());
      a.data.push_back(v.imag());
    }
  return a;
}

inline SignalAmplitude amplitude_from(const ArrayFile& a) {
  if (a.kind != "signal_amplitude" || a.shape.size() != 5 || a.shape[0] != 2 || a.shape[4] != 2)
    throw ValidationError("array '" + a.name + "' is not a signal amplitude");
  SignalGrid g;
  g.n_omega = int(a.shape[1]);
  g.n_theta = int(a.shape[2]);
  g.n_phi = int(a.shape[3]);
  g.omega_min = a.axes[1].first;
  g.omega_max = a.axes[1].at(a.shape[1] - 1);
  SignalAmplitude s(g);
  s.scenario_hash = a.scenario_hash;
  if (auto it = a.attrs.find("channel"); it != a.attrs.end()) s.channel = it->second;
  std::size_t n = 0;
  for (int p = 0; p < 2; ++p)
    for (auto& v : s.S[p]) {
      v = {a.data[n], a.data[n + 1]};
      n += 2;
    }
  return s;
}

/// dN/domega per frequency node.
inline ArrayFile omega_spectrum_array(const SignalAmplitude& s, const std::string& name) {
  const SignalGrid& g = s.grid;
  ArrayFile a;
  a.name = name;
  a.kind = "omega_spectrum";
  a.units = "photons/omega_ref";
  a.scenario_hash = s.scenario_hash;
  a.shape = {std::size_t(g.n_omega)};
  a.axes = {{"omega", "omega_ref", g.omega_min, g.d_omega(), std::size_t(g.n_omega)}};
  a.data = omega_marginal(s);
  a.attrs["channel"] = s.channel;
  return a;
}

} // namespace vacsim
