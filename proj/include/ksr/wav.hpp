#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "ksr/audio.hpp"
#include "ksr/binio.hpp"
#include "ksr/error.hpp"

namespace ksr {

/// Reads a RIFF/WAVE file. Only PCM, 16-bit, mono, 16 kHz is accepted;
/// samples are scaled by 1/32768 into [-1, 1].
inline AudioClip read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path.string());
  const std::string ctx = path.string();

  char riff[4];
  in.read(riff, 4);
  if (in.gcount() != 4 || std::memcmp(riff, "RIFF", 4) != 0)
    fail(ErrorCode::NotWav, ctx + ": missing RIFF header");
  read_u32(in, ctx);  // chunk size, unused
  char wave[4];
  in.read(wave, 4);
  if (in.gcount() != 4 || std::memcmp(wave, "WAVE", 4) != 0)
    fail(ErrorCode::NotWav, ctx + ": missing WAVE tag");

  bool have_fmt = false;
  std::uint16_t format_tag = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;

  while (true) {
    char tag[4];
    in.read(tag, 4);
    if (in.gcount() == 0) fail(ErrorCode::TruncatedFile, ctx + ": no data chunk");
    if (in.gcount() != 4) fail(ErrorCode::TruncatedFile, ctx + ": chunk header");
    const std::uint32_t size = read_u32(in, ctx);

    if (std::memcmp(tag, "fmt ", 4) == 0) {
      if (size < 16) fail(ErrorCode::TruncatedFile, ctx + ": short fmt chunk");
      format_tag = read_u16(in, ctx);
      channels = read_u16(in, ctx);
      rate = read_u32(in, ctx);
      read_u32(in, ctx);  // byte rate
      read_u16(in, ctx);  // block align
      bits = read_u16(in, ctx);
      in.seekg(size - 16 + (size & 1), std::ios::cur);
      have_fmt = true;
    } else if (std::memcmp(tag, "data", 4) == 0) {
      if (!have_fmt) fail(ErrorCode::NotWav, ctx + ": data before fmt");
      if (format_tag != 1)
        fail(ErrorCode::UnsupportedFormat, ctx + ": not PCM");
      if (channels != 1)
        fail(ErrorCode::UnsupportedFormat,
             ctx + ": expected mono, got " + std::to_string(channels) +
                 " channels");
      if (rate != static_cast<std::uint32_t>(kSampleRateHz))
        fail(ErrorCode::UnsupportedFormat,
             ctx + ": expected 16000 Hz, got " + std::to_string(rate));
      if (bits != 16)
        fail(ErrorCode::UnsupportedFormat,
             ctx + ": expected 16-bit samples, got " + std::to_string(bits));

      const std::size_t n = size / 2;
      std::vector<char> raw(size);
      in.read(raw.data(), static_cast<std::streamsize>(size));
      if (static_cast<std::uint32_t>(in.gcount()) != size)
        fail(ErrorCode::TruncatedFile, ctx + ": data chunk shorter than header");

      AudioClip clip;
      clip.samples.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        const std::int16_t v = static_cast<std::int16_t>(
            static_cast<std::uint16_t>(static_cast<unsigned char>(raw[2 * i])) |
            (static_cast<std::uint16_t>(static_cast<unsigned char>(raw[2 * i + 1]))
             << 8));
        clip.samples[i] = static_cast<double>(v) / 32768.0;
      }
      clip.utterance_id = path.stem().string();
      return clip;
    } else {
      in.seekg(size + (size & 1), std::ios::cur);
      if (!in) fail(ErrorCode::TruncatedFile, ctx + ": chunk body");
    }
  }
}

/// Writes 16-bit PCM mono at 16 kHz; byte-identical for identical input.
inline void write_wav(const std::filesystem::path& path, const AudioClip& clip) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::IoError, "cannot write " + path.string());

  const std::uint32_t n = static_cast<std::uint32_t>(clip.samples.size());
  const std::uint32_t data_bytes = n * 2;

  out.write("RIFF", 4);
  write_u32(out, 36 + data_bytes);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  write_u32(out, 16);
  write_u16(out, 1);  // PCM
  write_u16(out, 1);  // mono
  write_u32(out, kSampleRateHz);
  write_u32(out, kSampleRateHz * 2);
  write_u16(out, 2);   // block align
  write_u16(out, 16);  // bits
  out.write("data", 4);
  write_u32(out, data_bytes);
  for (std::uint32_t i = 0; i < n; ++i) {
    double v = clip.samples[i];
    long q = std::lrint(v * 32767.0);
    if (q > 32767) q = 32767;
    if (q < -32768) q = -32768;
    write_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
  }
  if (!out) fail(ErrorCode::IoError, "write failed: " + path.string());
}

}  // namespace ksr
