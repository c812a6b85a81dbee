// zsvc/audio/wav.cpp

// Copyright 2026  The zsvc authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "zsvc/audio/wav.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "zsvc/audio/resample.h"
#include "zsvc/common/error.h"

namespace zsvc::audio {

namespace {

constexpr uint16_t kFormatPcm = 0x0001;
constexpr uint16_t kFormatFloat = 0x0003;
constexpr uint16_t kFormatExtensible = 0xFFFE;

struct Reader {
  const uint8_t* p;
  size_t left;
  std::string name;

  void need(size_t n) const {
    ZSVC_CHECK(left >= n, DataError, "truncated wav file: " + name);
  }
  uint32_t u32() {
    need(4);
    uint32_t v;
    std::memcpy(&v, p, 4);
    p += 4;
    left -= 4;
    return v;
  }
  uint16_t u16() {
    need(2);
    uint16_t v;
    std::memcpy(&v, p, 2);
    p += 2;
    left -= 2;
    return v;
  }
  void skip(size_t n) {
    need(n);
    p += n;
    left -= n;
  }
  bool tag(const char* t) {
    need(4);
    return std::memcmp(p, t, 4) == 0;
  }
};

double decode_sample(const uint8_t* p, uint16_t format, uint16_t bits) {
  if (format == kFormatFloat) {
    float f;
    std::memcpy(&f, p, 4);
    return static_cast<double>(f);
  }
  switch (bits) {
    case 16: {
      int16_t v;
      std::memcpy(&v, p, 2);
      return v / 32768.0;
    }
    case 24: {
      int32_t v = (p[0] << 8) | (p[1] << 16) | (static_cast<int32_t>(p[2]) << 24);
      return (v >> 8) / 8388608.0;
    }
    case 32: {
      int32_t v;
      std::memcpy(&v, p, 4);
      return v / 2147483648.0;
    }
    default:
      throw DataError("unsupported wav bit depth: " + std::to_string(bits));
  }
}

}  // namespace

Waveform read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  ZSVC_CHECK(in.good(), DataError, "cannot open audio file: " + path.string());
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
  ZSVC_CHECK(!bytes.empty(), DataError, "empty audio file: " + path.string());

  Reader r{bytes.data(), bytes.size(), path.string()};
  ZSVC_CHECK(r.tag("RIFF"), DataError, "not a RIFF file: " + path.string());
  r.skip(4);
  r.u32();  // riff size, trusted only loosely
  ZSVC_CHECK(r.tag("WAVE"), DataError, "not a WAVE file: " + path.string());
  r.skip(4);

  uint16_t format = 0, channels = 0, bits = 0;
  uint32_t rate = 0;
  const uint8_t* data = nullptr;
  size_t data_len = 0;

  while (r.left >= 8) {
    char id[4];
    std::memcpy(id, r.p, 4);
    r.skip(4);
    uint32_t chunk_len = r.u32();
    chunk_len = static_cast<uint32_t>(std::min<size_t>(chunk_len, r.left));
    if (std::memcmp(id, "fmt ", 4) == 0) {
      ZSVC_CHECK(chunk_len >= 16, DataError, "bad fmt chunk: " + path.string());
      const uint8_t* fmt = r.p;
      std::memcpy(&format, fmt, 2);
      std::memcpy(&channels, fmt + 2, 2);
      std::memcpy(&rate, fmt + 4, 4);
      std::memcpy(&bits, fmt + 14, 2);
      if (format == kFormatExtensible) {
        ZSVC_CHECK(chunk_len >= 40, DataError, "bad extensible fmt chunk: " + path.string());
        std::memcpy(&format, fmt + 24, 2);  // first two bytes of the subformat GUID
      }
      r.skip(chunk_len);
    } else if (std::memcmp(id, "data", 4) == 0) {
      data = r.p;
      data_len = chunk_len;
      r.skip(chunk_len);
    } else {
      r.skip(chunk_len + (chunk_len & 1));  // chunks are word-aligned
    }
  }

  ZSVC_CHECK(format == kFormatPcm || format == kFormatFloat, DataError,
             "unsupported wav format in " + path.string());
  ZSVC_CHECK(channels >= 1 && rate > 0, DataError, "bad wav header: " + path.string());
  if (format == kFormatFloat)
    ZSVC_CHECK(bits == 32, DataError, "unsupported float bit depth in " + path.string());
  ZSVC_CHECK(data != nullptr, DataError, "wav file has no data chunk: " + path.string());

  const size_t bytes_per_sample = bits / 8;
  const size_t frame_bytes = bytes_per_sample * channels;
  const size_t num_frames = frame_bytes > 0 ? data_len / frame_bytes : 0;
  ZSVC_CHECK(num_frames > 0, DataError, "wav file has no samples: " + path.string());

  Waveform wave;
  wave.sample_rate = static_cast<int>(rate);
  wave.samples.resize(num_frames);
  for (size_t i = 0; i < num_frames; ++i) {
    double acc = 0.0;
    for (uint16_t c = 0; c < channels; ++c)
      acc += decode_sample(data + i * frame_bytes + c * bytes_per_sample, format, bits);
    wave.samples[i] = acc / channels;
  }
  return wave;
}

Waveform load_waveform(const std::filesystem::path& path) {
  Waveform wave = read_wav(path);
  if (wave.sample_rate == kTargetSampleRate) return wave;
  Waveform out;
  out.sample_rate = kTargetSampleRate;
  out.samples = resample(wave.samples, wave.sample_rate, kTargetSampleRate);
  return out;
}

void write_wav(const std::filesystem::path& path, const Waveform& wave) {
  ZSVC_CHECK(wave.sample_rate > 0, ConfigError, "waveform has no sample rate");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  ZSVC_CHECK(out.good(), DataError, "cannot open for writing: " + path.string());

  const uint32_t n = static_cast<uint32_t>(wave.samples.size());
  const uint32_t data_bytes = n * 2;
  const uint32_t riff_size = 36 + data_bytes;
  const uint32_t rate = static_cast<uint32_t>(wave.sample_rate);
  const uint32_t byte_rate = rate * 2;
  const uint16_t block_align = 2, bits = 16, fmt = kFormatPcm, channels = 1;
  const uint32_t fmt_len = 16;

  auto w32 = [&](uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); };
  auto w16 = [&](uint16_t v) { out.write(reinterpret_cast<const char*>(&v), 2); };
  out.write("RIFF", 4);
  w32(riff_size);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  w32(fmt_len);
  w16(fmt);
  w16(channels);
  w32(rate);
  w32(byte_rate);
  w16(block_align);
  w16(bits);
  out.write("data", 4);
  w32(data_bytes);
  for (double s : wave.samples) {
    const double clamped = std::clamp(s, -1.0, 1.0);
    const auto v = static_cast<int16_t>(std::lround(clamped * 32767.0));
    w16(static_cast<uint16_t>(v));
  }
  out.flush();
  ZSVC_CHECK(out.good(), DataError, "write failed: " + path.string());
}

}  // namespace zsvc::audio
