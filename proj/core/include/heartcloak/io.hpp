#pragma once

#include <filesystem>
#include <string>

#include "heartcloak/dsp/spectral.hpp"
#include "heartcloak/fmcw.hpp"
#include "heartcloak/obfuscation.hpp"
#include "heartcloak/signal_model.hpp"

namespace heartcloak::io {

// Key file: JSON object {p, space{low,high,resolution,distribution},
// frequencies_bpm[], seed}. Frequencies are snapped back onto the grid on load
// and rejected if they are off-grid.
std::string key_to_json(const ObfuscationKey& key);
ObfuscationKey key_from_json(const std::string& text);
void write_key(const std::filesystem::path& path, const ObfuscationKey& key);
ObfuscationKey read_key(const std::filesystem::path& path);

// Displacement CSV: "# sample_rate_hz=<fs> label=<label>" comment line, then
// header t_s,displacement_mm and one row per sample.
void write_displacement_csv(const std::filesystem::path& path, const DisplacementSignal& sig);
DisplacementSignal read_displacement_csv(const std::filesystem::path& path);

// IF binary: 8-byte magic, u32 rows, u32 cols (little endian), then rows*cols
// interleaved float32 (re, im) pairs, row major.
inline constexpr char kIfMagic[8] = {'H', 'C', 'L', 'K', 'I', 'F', '0', '1'};
void write_if_binary(const std::filesystem::path& path, const ComplexMatrix& m);
ComplexMatrix read_if_binary(const std::filesystem::path& path);

// Spectrogram: first line is the row count followed by the column times;
// each further line is a frequency in BPM followed by that row's magnitudes
// (gnuplot "nonuniform matrix" layout).
void write_spectrogram(const std::filesystem::path& path, const dsp::Spectrogram& sg);
dsp::Spectrogram read_spectrogram(const std::filesystem::path& path);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace heartcloak::io
