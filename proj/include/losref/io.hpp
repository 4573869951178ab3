#pragma once

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "losref/radio.hpp"

// On-disk formats.
//
// CSIR-v1 (CFR snapshot container): one text header line
//   CSIR1 <json-metadata>\n
// followed by per-snapshot binary records, little-endian:
//   float64 time_s, float32 rssi_db, float32 re/im pairs per subcarrier in
//   index order.
//
// MAT1 (matrix container): one text header line
//   MAT1 <json-metadata>\n
// followed by the row axis (float64[rows]), the column axis
// (float64[cols]) and the payload (float32[rows*cols], row-major).

namespace losref {

namespace io_detail {

inline void require_little_endian() {
  static const bool ok = [] {
    const std::uint16_t probe = 0x0102;
    std::uint8_t bytes[2];
    std::memcpy(bytes, &probe, 2);
    return bytes[0] == 0x02;
  }();
  if (!ok) throw Error("big-endian hosts are not supported by the binary formats");
}

template <typename T>
void write_raw(std::ostream& out, const T* data, std::size_t count) {
  out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(count * sizeof(T)));
}

template <typename T>
void read_raw(std::istream& in, T* data, std::size_t count) {
  in.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(count * sizeof(T)));
  if (!in) throw DataError("file truncated while reading binary payload");
}

/// Write via a temp file and rename, so readers never observe partial files.
template <typename WriteFn>
void atomic_write(const std::filesystem::path& path, WriteFn&& fn) {
  require_little_endian();
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp.string() + " for writing");
    fn(out);
    if (!out) throw Error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline std::string read_header_line(std::istream& in, const std::string& magic) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("missing header line");
  if (line.rfind(magic + " ", 0) != 0) throw DataError("bad magic, expected " + magic);
  return line.substr(magic.size() + 1);
}

}  // namespace io_detail

inline nlohmann::json radio_to_json(const RadioParams& r) {
  return {{"carrier_frequency_hz", r.carrier_frequency_hz},
          {"bandwidth_hz", r.bandwidth_hz},
          {"subcarrier_spacing_hz", r.subcarrier_spacing_hz},
          {"speed_of_light_m_s", r.speed_of_light_m_s},
          {"oversampling_factor", r.oversampling_factor},
          {"fft_points_base", r.fft_points_base},
          {"subcarrier_index_range",
           {r.subcarrier_indices.front(), r.subcarrier_indices.back()}}};
}

inline RadioParams radio_from_json(const nlohmann::json& j) {
  RadioParams r = default_radio();
  if (j.contains("carrier_frequency_hz")) r.carrier_frequency_hz = j.at("carrier_frequency_hz");
  if (j.contains("bandwidth_hz")) r.bandwidth_hz = j.at("bandwidth_hz");
  if (j.contains("subcarrier_spacing_hz"))
    r.subcarrier_spacing_hz = j.at("subcarrier_spacing_hz");
  if (j.contains("speed_of_light_m_s")) r.speed_of_light_m_s = j.at("speed_of_light_m_s");
  if (j.contains("wavelength_m")) r.wavelength_m = j.at("wavelength_m");
  if (j.contains("oversampling_factor")) r.oversampling_factor = j.at("oversampling_factor");
  if (j.contains("fft_points_base")) r.fft_points_base = j.at("fft_points_base");
  if (j.contains("subcarrier_indices")) {
    r.subcarrier_indices = j.at("subcarrier_indices").get<std::vector<int>>();
  } else if (j.contains("subcarrier_index_range")) {
    const auto range = j.at("subcarrier_index_range");
    r.subcarrier_indices = index_range(range.at(0), range.at(1));
  }
  r.validate();
  return r;
}

inline void write_csir(const std::filesystem::path& path, const CfrSeries& series) {
  series.validate();
  nlohmann::json meta = {{"format", "CSIR"},
                         {"version", 1},
                         {"snapshot_count", series.snapshots.size()},
                         {"radio", radio_to_json(series.radio)}};
  io_detail::atomic_write(path, [&](std::ostream& out) {
    out << "CSIR1 " << meta.dump() << "\n";
    const std::size_t bins = series.radio.subcarrier_indices.size();
    std::vector<float> record(1 + 2 * bins);
    for (const auto& s : series.snapshots) {
      const double t = s.time_s;
      io_detail::write_raw(out, &t, 1);
      record[0] = static_cast<float>(s.rssi_db);
      for (std::size_t p = 0; p < bins; ++p) {
        record[1 + 2 * p] = static_cast<float>(s.values[p].real());
        record[2 + 2 * p] = static_cast<float>(s.values[p].imag());
      }
      io_detail::write_raw(out, record.data(), record.size());
    }
  });
}

inline CfrSeries read_csir(const std::filesystem::path& path) {
  io_detail::require_little_endian();
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(io_detail::read_header_line(in, "CSIR1"));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bad CSIR1 header: ") + e.what());
  }
  CfrSeries series;
  try {
    series.radio = radio_from_json(meta.at("radio"));
    const std::size_t count = meta.at("snapshot_count");
    const std::size_t bins = series.radio.subcarrier_indices.size();
    auto indices = std::make_shared<const std::vector<int>>(series.radio.subcarrier_indices);
    series.snapshots.resize(count);
    std::vector<float> record(1 + 2 * bins);
    for (auto& s : series.snapshots) {
      io_detail::read_raw(in, &s.time_s, 1);
      io_detail::read_raw(in, record.data(), record.size());
      s.rssi_db = record[0];
      s.indices = indices;
      s.values.resize(bins);
      for (std::size_t p = 0; p < bins; ++p)
        s.values[p] = {record[1 + 2 * p], record[2 + 2 * p]};
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bad CSIR1 metadata: ") + e.what());
  }
  series.validate();
  return series;
}

/// Generic 2-D product matrix with named, unit-tagged axes.
struct MatrixFile {
  std::string name;
  std::string row_axis_name, row_axis_unit;
  std::string col_axis_name, col_axis_unit;
  std::string value_unit;
  std::vector<double> row_axis;
  std::vector<double> col_axis;
  std::vector<float> payload;  // row-major [rows][cols]

  std::size_t rows() const { return row_axis.size(); }
  std::size_t cols() const { return col_axis.size(); }
};

inline void write_mat1(const std::filesystem::path& path, const MatrixFile& m) {
  if (m.payload.size() != m.rows() * m.cols())
    throw DataError("mat1: payload size does not match axes");
  nlohmann::json meta = {{"format", "MAT"},
                         {"version", 1},
                         {"name", m.name},
                         {"rows", m.rows()},
                         {"cols", m.cols()},
                         {"row_axis", {{"name", m.row_axis_name}, {"unit", m.row_axis_unit}}},
                         {"col_axis", {{"name", m.col_axis_name}, {"unit", m.col_axis_unit}}},
                         {"value_unit", m.value_unit}};
  io_detail::atomic_write(path, [&](std::ostream& out) {
    out << "MAT1 " << meta.dump() << "\n";
    io_detail::write_raw(out, m.row_axis.data(), m.row_axis.size());
    io_detail::write_raw(out, m.col_axis.data(), m.col_axis.size());
    io_detail::write_raw(out, m.payload.data(), m.payload.size());
  });
}

inline MatrixFile read_mat1(const std::filesystem::path& path) {
  io_detail::require_little_endian();
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  MatrixFile m;
  try {
    const nlohmann::json meta =
        nlohmann::json::parse(io_detail::read_header_line(in, "MAT1"));
    m.name = meta.at("name");
    m.row_axis_name = meta.at("row_axis").at("name");
    m.row_axis_unit = meta.at("row_axis").at("unit");
    m.col_axis_name = meta.at("col_axis").at("name");
    m.col_axis_unit = meta.at("col_axis").at("unit");
    m.value_unit = meta.at("value_unit");
    m.row_axis.resize(meta.at("rows").get<std::size_t>());
    m.col_axis.resize(meta.at("cols").get<std::size_t>());
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bad MAT1 header: ") + e.what());
  }
  io_detail::read_raw(in, m.row_axis.data(), m.row_axis.size());
  io_detail::read_raw(in, m.col_axis.data(), m.col_axis.size());
  m.payload.resize(m.rows() * m.cols());
  io_detail::read_raw(in, m.payload.data(), m.payload.size());
  return m;
}

/// Plain-text mirror of a MAT1 matrix for spot inspection.
inline void write_matrix_csv(const std::filesystem::path& path, const MatrixFile& m) {
  io_detail::atomic_write(path, [&](std::ostream& out) {
    out << "# " << m.name << ": rows=" << m.row_axis_name << " (" << m.row_axis_unit
        << "), cols=" << m.col_axis_name << " (" << m.col_axis_unit << "), values in "
        << m.value_unit << "\n";
    out << m.row_axis_name;
    char buf[64];
    for (double c : m.col_axis) {
      std::snprintf(buf, sizeof buf, ",%.9g", c);
      out << buf;
    }
    out << "\n";
    for (std::size_t r = 0; r < m.rows(); ++r) {
      std::snprintf(buf, sizeof buf, "%.9g", m.row_axis[r]);
      out << buf;
      for (std::size_t c = 0; c < m.cols(); ++c) {
        std::snprintf(buf, sizeof buf, ",%.7g", m.payload[r * m.cols() + c]);
        out << buf;
      }
      out << "\n";
    }
  });
}

/// FNV-1a 64-bit, used for config/input fingerprints in run manifests.
inline std::uint64_t fnv1a(const void* data, std::size_t size, std::uint64_t seed = 0xcbf29ce484222325ULL) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  std::uint64_t hash = seed;
  for (std::size_t i = 0; i < size; ++i) {
    hash ^= bytes[i];
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

inline std::string fnv1a_hex(const std::string& text) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a(text.data(), text.size())));
  return buf;
}

inline std::string hash_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  char buf[65536];
  while (in.read(buf, sizeof buf) || in.gcount() > 0)
    hash = fnv1a(buf, static_cast<std::size_t>(in.gcount()), hash);
  char out[17];
  std::snprintf(out, sizeof out, "%016llx", static_cast<unsigned long long>(hash));
  return out;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  io_detail::atomic_write(path, [&](std::ostream& out) { out << text; });
}

}  // namespace losref
