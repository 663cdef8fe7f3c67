#include "heartcloak/io.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "heartcloak/error.hpp"

namespace heartcloak::io {

namespace {

std::string num(double v, const char* format = "%.9g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

void put_u32(std::ostream& os, std::uint32_t v) {
  const std::array<char, 4> b{static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF),
                              static_cast<char>((v >> 16) & 0xFF),
                              static_cast<char>((v >> 24) & 0xFF)};
  os.write(b.data(), 4);
}

std::uint32_t get_u32(std::istream& is) {
  std::array<unsigned char, 4> b{};
  is.read(reinterpret_cast<char*>(b.data()), 4);
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void put_f32(std::ostream& os, float f) {
  std::uint32_t u;
  std::memcpy(&u, &f, 4);
  put_u32(os, u);
}

float get_f32(std::istream& is) {
  const std::uint32_t u = get_u32(is);
  float f;
  std::memcpy(&f, &u, 4);
  return f;
}

std::ofstream open_out(const std::filesystem::path& path, bool binary = false) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out | std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  return in;
}

double parse_double(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw IoError("malformed number in " + what + ": '" + s + "'");
  }
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(line);
  while (std::getline(is, cur, sep)) {
    if (!cur.empty() && cur.back() == '\r') cur.pop_back();
    out.push_back(cur);
  }
  return out;
}

}  // namespace

std::string read_text(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

// ---------------------------------------------------------------------------

std::string key_to_json(const ObfuscationKey& key) {
  nlohmann::ordered_json j;
  j["p"] = key.p();
  j["space"] = {{"low_bpm", key.space.low_bpm},
                {"high_bpm", key.space.high_bpm},
                {"resolution_bpm", key.space.resolution_bpm},
                {"distribution", std::string(to_string(key.space.distribution))}};
  auto freqs = nlohmann::ordered_json::array();
  for (double f : key.frequencies_bpm()) freqs.push_back(std::round(f * 1e9) / 1e9);
  j["frequencies_bpm"] = std::move(freqs);
  j["seed"] = key.seed;
  return j.dump(2) + "\n";
}

ObfuscationKey key_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("key file is not valid JSON: ") + e.what());
  }
  try {
    ObfuscationKey key;
    const auto& s = j.at("space");
    key.space.low_bpm = s.at("low_bpm").get<double>();
    key.space.high_bpm = s.at("high_bpm").get<double>();
    key.space.resolution_bpm = s.at("resolution_bpm").get<double>();
    key.space.distribution = distribution_from_string(s.at("distribution").get<std::string>());
    key.space.validate();
    for (const auto& f : j.at("frequencies_bpm")) {
      key.frequencies.push_back(key.space.index_of(f.get<double>()));
    }
    key.seed = j.at("seed").get<std::uint64_t>();
    require(j.at("p").get<std::size_t>() == key.p(), "key p does not match frequency count");
    require(key.p() >= 1, "key must hold at least one frequency");
    return key;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed key file: ") + e.what());
  }
}

void write_key(const std::filesystem::path& path, const ObfuscationKey& key) {
  write_text(path, key_to_json(key));
}

ObfuscationKey read_key(const std::filesystem::path& path) { return key_from_json(read_text(path)); }

// ---------------------------------------------------------------------------

void write_displacement_csv(const std::filesystem::path& path, const DisplacementSignal& sig) {
  sig.validate();
  std::string text;
  text.reserve(sig.size() * 32 + 64);
  text += "# sample_rate_hz=" + num(sig.sample_rate, "%.17g") + " label=" +
          std::string(to_string(sig.label)) + "\n";
  text += "t_s,displacement_mm\n";
  for (std::size_t i = 0; i < sig.size(); ++i) {
    text += num(static_cast<double>(i) / sig.sample_rate, "%.9f");
    text += ',';
    text += num(sig.samples[i], "%.12g");
    text += '\n';
  }
  write_text(path, text);
}

DisplacementSignal read_displacement_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  DisplacementSignal sig;
  std::string line;
  std::vector<double> times;
  bool header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream is(line.substr(1));
      std::string tok;
      while (is >> tok) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos) continue;
        const auto k = tok.substr(0, eq), v = tok.substr(eq + 1);
        if (k == "sample_rate_hz") sig.sample_rate = parse_double(v, path.string());
        if (k == "label") {
          sig.label = v == "true" ? SignalLabel::true_signal
                      : v == "decoy" ? SignalLabel::decoy
                                     : SignalLabel::composite;
        }
      }
      continue;
    }
    if (!header) {
      if (line != "t_s,displacement_mm") throw IoError("unexpected CSV header: " + line);
      header = true;
      continue;
    }
    const auto cells = split(line, ',');
    if (cells.size() != 2) throw IoError("expected 2 columns: " + line);
    times.push_back(parse_double(cells[0], path.string()));
    sig.samples.push_back(parse_double(cells[1], path.string()));
  }
  if (!header) throw IoError("missing CSV header in " + path.string());
  if (sig.sample_rate <= 0.0) {
    if (times.size() < 2) throw IoError("cannot infer sample rate from " + path.string());
    sig.sample_rate = static_cast<double>(times.size() - 1) / (times.back() - times.front());
  }
  sig.validate();
  return sig;
}

// ---------------------------------------------------------------------------

void write_if_binary(const std::filesystem::path& path, const ComplexMatrix& m) {
  require(m.data.size() == m.rows * m.cols, "matrix storage does not match its shape");
  require(m.rows <= UINT32_MAX && m.cols <= UINT32_MAX, "matrix too large for the IF format");
  auto out = open_out(path, true);
  out.write(kIfMagic, sizeof kIfMagic);
  put_u32(out, static_cast<std::uint32_t>(m.rows));
  put_u32(out, static_cast<std::uint32_t>(m.cols));
  for (const auto& z : m.data) {
    put_f32(out, z.real());
    put_f32(out, z.imag());
  }
  if (!out) throw IoError("write failed: " + path.string());
}

ComplexMatrix read_if_binary(const std::filesystem::path& path) {
  auto in = open_in(path);
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kIfMagic, sizeof magic) != 0) {
    throw IoError("not an IF binary file: " + path.string());
  }
  const std::uint32_t rows = get_u32(in);
  const std::uint32_t cols = get_u32(in);
  if (!in) throw IoError("truncated IF header: " + path.string());
  ComplexMatrix m(rows, cols);
  for (auto& z : m.data) {
    const float re = get_f32(in);
    const float im = get_f32(in);
    z = {re, im};
  }
  if (!in) throw IoError("truncated IF payload: " + path.string());
  return m;
}

// ---------------------------------------------------------------------------

void write_spectrogram(const std::filesystem::path& path, const dsp::Spectrogram& sg) {
  std::string text = std::to_string(sg.frequency_bpm.size());
  for (double t : sg.time_s) text += ' ' + num(t, "%.6f");
  text += '\n';
  for (std::size_t r = 0; r < sg.frequency_bpm.size(); ++r) {
    text += num(sg.frequency_bpm[r], "%.6f");
    for (double v : sg.magnitude[r]) text += ' ' + num(v, "%.9e");
    text += '\n';
  }
  write_text(path, text);
}

dsp::Spectrogram read_spectrogram(const std::filesystem::path& path) {
  auto in = open_in(path);
  dsp::Spectrogram sg;
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty spectrogram file: " + path.string());
  std::istringstream head(line);
  std::size_t rows = 0;
  head >> rows;
  double t;
  while (head >> t) sg.time_s.push_back(t);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream is(line);
    double f;
    is >> f;
    sg.frequency_bpm.push_back(f);
    std::vector<double> row;
    double v;
    while (is >> v) row.push_back(v);
    if (row.size() != sg.time_s.size()) throw IoError("ragged spectrogram row");
    sg.magnitude.push_back(std::move(row));
  }
  if (sg.frequency_bpm.size() != rows) throw IoError("spectrogram row count mismatch");
  return sg;
}

}  // namespace heartcloak::io
