#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "ksr/synth.hpp"
#include "support/oracles.hpp"

using ksr::Error;
using ksr::ErrorCode;
using ksr::SyntheticSpeakerProfile;

namespace {

SyntheticSpeakerProfile base_profile() {
  SyntheticSpeakerProfile p;
  p.speaker_id = "spk_test";
  p.f0_hz = 220.0;
  p.formants_hz = {500.0, 1500.0, 2500.0, 3500.0};
  p.formant_bandwidths_hz = {80.0, 100.0, 120.0, 140.0};
  p.noise_mix = 0.1;
  p.seed = 99;
  return p;
}

}  // namespace

TEST_CASE("synth_utterance: sample count and peak normalization") {
  const auto clip = ksr::synth_utterance(base_profile(), 1.0, 0);
  REQUIRE(clip.samples.size() == 16000);
  double peak = 0.0;
  for (double s : clip.samples) peak = std::max(peak, std::fabs(s));
  REQUIRE(std::fabs(peak - 0.5) < 1e-6);
}

TEST_CASE("synth_utterance: deterministic under fixed profile and seed") {
  const auto a = ksr::synth_utterance(base_profile(), 2.5, 7);
  const auto b = ksr::synth_utterance(base_profile(), 2.5, 7);
  REQUIRE(a.samples == b.samples);

  const auto c = ksr::synth_utterance(base_profile(), 2.5, 8);
  REQUIRE(a.samples != c.samples);
}

TEST_CASE("synth_utterance: silence gaps every ~2 s") {
  const auto clip = ksr::synth_utterance(base_profile(), 8.0, 3);
  auto gap_energy = [&](std::size_t begin, std::size_t end) {
    double e = 0.0;
    for (std::size_t i = begin; i < end; ++i)
      e += clip.samples[i] * clip.samples[i];
    return e / static_cast<double>(end - begin);
  };
  // Gaps at [2.0, 2.2) and [4.0, 4.2) s carry only the -60 dB dither.
  for (std::size_t i = 32000; i < 35200; ++i)
    REQUIRE(std::fabs(clip.samples[i]) < 2e-3);
  for (std::size_t i = 64000; i < 67200; ++i)
    REQUIRE(std::fabs(clip.samples[i]) < 2e-3);
  const double live = gap_energy(40000, 48000);
  REQUIRE(gap_energy(32000, 35200) < live * 1e-4);
  REQUIRE(gap_energy(64000, 67200) < live * 1e-4);
  REQUIRE(live > 1e-4);
}

TEST_CASE("synth_utterance: distinct formant sets separate in the 2-4 kHz band") {
  // Long-run average spectra of the two profile families must differ in
  // 2-4 kHz band-energy ratio by more than 3 dB (checked with an
  // independent Welch-style spectrum estimate).
  auto pa = base_profile();
  pa.formants_hz = {500.0, 1500.0, 2500.0, 3500.0};
  auto pb = base_profile();
  pb.speaker_id = "spk_other";
  pb.formants_hz = {900.0, 2100.0, 3300.0, 4500.0};

  const auto clip_a = ksr::synth_utterance(pa, 8.0, 1);
  const auto clip_b = ksr::synth_utterance(pb, 8.0, 1);

  const double ratio_a =
      oracle::band_energy_ratio(clip_a.samples, 2000.0, 4000.0, 16000.0);
  const double ratio_b =
      oracle::band_energy_ratio(clip_b.samples, 2000.0, 4000.0, 16000.0);
  REQUIRE(ratio_a > 0.0);
  REQUIRE(ratio_b > 0.0);
  const double drift_db = std::fabs(10.0 * std::log10(ratio_b / ratio_a));
  REQUIRE(drift_db > 3.0);
}

TEST_CASE("synth_utterance: invalid profiles are rejected") {
  auto non_increasing = base_profile();
  non_increasing.formants_hz = {1500.0, 500.0, 2500.0, 3500.0};
  try {
    ksr::synth_utterance(non_increasing, 1.0, 0);
    FAIL("expected InvalidProfile");
  } catch (const Error& e) {
    REQUIRE(e.code() == ErrorCode::InvalidProfile);
  }

  auto bad_f0 = base_profile();
  bad_f0.f0_hz = 100.0;
  try {
    ksr::synth_utterance(bad_f0, 1.0, 0);
    FAIL("expected InvalidProfile");
  } catch (const Error& e) {
    REQUIRE(e.code() == ErrorCode::InvalidProfile);
  }

  auto bad_noise = base_profile();
  bad_noise.noise_mix = 0.7;
  try {
    ksr::synth_utterance(bad_noise, 1.0, 0);
    FAIL("expected InvalidProfile");
  } catch (const Error& e) {
    REQUIRE(e.code() == ErrorCode::InvalidProfile);
  }
}

TEST_CASE("synth_utterance: non-positive duration is rejected") {
  try {
    ksr::synth_utterance(base_profile(), 0.0, 0);
    FAIL("expected InvalidArgument");
  } catch (const Error& e) {
    REQUIRE(e.code() == ErrorCode::InvalidArgument);
  }
}

TEST_CASE("make_speaker_profile: valid, deterministic, speaker-distinct") {
  const auto a1 = ksr::make_speaker_profile("spk001", 42);
  const auto a2 = ksr::make_speaker_profile("spk001", 42);
  const auto b = ksr::make_speaker_profile("spk002", 42);

  REQUIRE(a1.f0_hz == a2.f0_hz);
  REQUIRE(a1.formants_hz == a2.formants_hz);
  REQUIRE(a1.formants_hz != b.formants_hz);
  ksr::validate_profile(a1);
  ksr::validate_profile(b);
}
