#include <catch2/catch_amalgamated.hpp>

#include <cstdint>
#include <fstream>
#include <vector>

#include "ksr/rng.hpp"
#include "ksr/wav.hpp"
#include "support/temp_dir.hpp"

using ksr::AudioClip;
using ksr::Error;
using ksr::ErrorCode;

namespace {

void write_bytes(const std::filesystem::path& path,
                 const std::vector<unsigned char>& bytes) {
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

void push_u32(std::vector<unsigned char>& v, std::uint32_t x) {
  for (int i = 0; i < 4; ++i) v.push_back(static_cast<unsigned char>(x >> (8 * i)));
}
void push_u16(std::vector<unsigned char>& v, std::uint16_t x) {
  v.push_back(static_cast<unsigned char>(x & 0xff));
  v.push_back(static_cast<unsigned char>(x >> 8));
}
void push_tag(std::vector<unsigned char>& v, const char* tag) {
  for (int i = 0; i < 4; ++i) v.push_back(static_cast<unsigned char>(tag[i]));
}

/// Hand-built PCM WAV, independent of the library writer.
std::vector<unsigned char> raw_wav(const std::vector<std::int16_t>& samples,
                                   std::uint16_t channels, std::uint32_t rate,
                                   std::uint16_t bits) {
  std::vector<unsigned char> v;
  const std::uint32_t data_bytes =
      static_cast<std::uint32_t>(samples.size() * 2);
  push_tag(v, "RIFF");
  push_u32(v, 36 + data_bytes);
  push_tag(v, "WAVE");
  push_tag(v, "fmt ");
  push_u32(v, 16);
  push_u16(v, 1);
  push_u16(v, channels);
  push_u32(v, rate);
  push_u32(v, rate * channels * bits / 8);
  push_u16(v, static_cast<std::uint16_t>(channels * bits / 8));
  push_u16(v, bits);
  push_tag(v, "data");
  push_u32(v, data_bytes);
  for (std::int16_t s : samples)
    push_u16(v, static_cast<std::uint16_t>(s));
  return v;
}

}  // namespace

TEST_CASE("read_wav: one second of digital silence") {
  testsupport::TempDir tmp("wav");
  const auto path = tmp.path() / "silence.wav";
  write_bytes(path, raw_wav(std::vector<std::int16_t>(16000, 0), 1, 16000, 16));

  const AudioClip clip = ksr::read_wav(path);
  REQUIRE(clip.samples.size() == 16000);
  for (double s : clip.samples) REQUIRE(s == 0.0);
}

TEST_CASE("read_wav: full-scale -32768 maps to -1.0 exactly") {
  testsupport::TempDir tmp("wav");
  const auto path = tmp.path() / "fullscale.wav";
  write_bytes(path, raw_wav({-32768, 32767, 0, -16384}, 1, 16000, 16));

  const AudioClip clip = ksr::read_wav(path);
  REQUIRE(clip.samples[0] == -1.0);
  REQUIRE(clip.samples[1] == Catch::Approx(32767.0 / 32768.0));
  REQUIRE(clip.samples[2] == 0.0);
  REQUIRE(clip.samples[3] == -0.5);
}

TEST_CASE("read_wav: stereo is rejected") {
  testsupport::TempDir tmp("wav");
  const auto path = tmp.path() / "stereo.wav";
  write_bytes(path, raw_wav({0, 0, 0, 0}, 2, 16000, 16));
  try {
    ksr::read_wav(path);
    FAIL("expected UnsupportedFormat");
  } catch (const Error& e) {
    REQUIRE(e.code() == ErrorCode::UnsupportedFormat);
  }
}

TEST_CASE("read_wav: wrong rate and bit depth are rejected") {
  testsupport::TempDir tmp("wav");
  const auto p8k = tmp.path() / "rate.wav";
  write_bytes(p8k, raw_wav({0, 0}, 1, 8000, 16));
  try {
    ksr::read_wav(p8k);
    FAIL("expected UnsupportedFormat");
  } catch (const Error& e) {
    REQUIRE(e.code() == ErrorCode::UnsupportedFormat);
  }
}

TEST_CASE("read_wav: non-WAV data is rejected") {
  testsupport::TempDir tmp("wav");
  const auto path = tmp.path() / "not.wav";
  write_bytes(path, {'h', 'e', 'l', 'l', 'o', ' ', 't', 'h', 'e', 'r', 'e'});
  try {
    ksr::read_wav(path);
    FAIL("expected NotWav");
  } catch (const Error& e) {
    REQUIRE(e.code() == ErrorCode::NotWav);
  }
}

TEST_CASE("read_wav: truncated data chunk is rejected") {
  testsupport::TempDir tmp("wav");
  const auto path = tmp.path() / "trunc.wav";
  auto bytes = raw_wav(std::vector<std::int16_t>(100, 42), 1, 16000, 16);
  bytes.resize(bytes.size() - 60);
  write_bytes(path, bytes);
  try {
    ksr::read_wav(path);
    FAIL("expected TruncatedFile");
  } catch (const Error& e) {
    REQUIRE(e.code() == ErrorCode::TruncatedFile);
  }
}

TEST_CASE("wav round trip stays within quantization error") {
  testsupport::TempDir tmp("wav");
  ksr::Rng rng(404);
  AudioClip clip;
  clip.utterance_id = "rt";
  clip.samples.resize(4000);
  for (auto& s : clip.samples) s = rng.uniform(-1.0, 1.0);

  const auto path = tmp.path() / "rt.wav";
  ksr::write_wav(path, clip);
  const AudioClip back = ksr::read_wav(path);
  REQUIRE(back.samples.size() == clip.samples.size());
  for (std::size_t i = 0; i < clip.samples.size(); ++i)
    REQUIRE(std::fabs(back.samples[i] - clip.samples[i]) < 5e-5);
}

TEST_CASE("write_wav is byte-deterministic") {
  testsupport::TempDir tmp("wav");
  ksr::Rng rng(7);
  AudioClip clip;
  clip.samples.resize(1000);
  for (auto& s : clip.samples) s = rng.uniform(-0.9, 0.9);

  ksr::write_wav(tmp.path() / "a.wav", clip);
  ksr::write_wav(tmp.path() / "b.wav", clip);
  std::ifstream a(tmp.path() / "a.wav", std::ios::binary);
  std::ifstream b(tmp.path() / "b.wav", std::ios::binary);
  const std::string sa((std::istreambuf_iterator<char>(a)), {});
  const std::string sb((std::istreambuf_iterator<char>(b)), {});
  REQUIRE(sa == sb);
  REQUIRE(!sa.empty());
}
