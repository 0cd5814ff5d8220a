#include "seedloop/tensorio.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <string>

#include "seedloop/error.hpp"

namespace seedloop {

namespace {

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoFailure, "cannot open " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::IoFailure, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorCode::IoFailure, "write failed for " + path.string());
}

bool is_space(std::uint8_t c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

// Netpbm header: magic, width, height, maxval, separated by whitespace and
// '#' comments, followed by exactly one whitespace byte before the payload.
struct PnmHeader {
  int width = 0;
  int height = 0;
  int maxval = 0;
  std::size_t payload_offset = 0;
};

PnmHeader parse_pnm_header(std::span<const std::uint8_t> bytes, const char* magic) {
  if (bytes.size() < 2 || bytes[0] != magic[0] || bytes[1] != magic[1])
    fail(ErrorCode::MalformedHeader, std::string("expected magic ") + magic);
  std::size_t pos = 2;
  auto next_int = [&]() -> long {
    for (;;) {
      while (pos < bytes.size() && is_space(bytes[pos])) ++pos;
      if (pos < bytes.size() && bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
        continue;
      }
      break;
    }
    if (pos >= bytes.size() || bytes[pos] < '0' || bytes[pos] > '9')
      fail(ErrorCode::MalformedHeader, "expected integer in header");
    long v = 0;
    while (pos < bytes.size() && bytes[pos] >= '0' && bytes[pos] <= '9') {
      v = v * 10 + (bytes[pos] - '0');
      if (v > std::numeric_limits<int>::max()) fail(ErrorCode::MalformedHeader, "header value too large");
      ++pos;
    }
    return v;
  };
  PnmHeader h;
  h.width = static_cast<int>(next_int());
  h.height = static_cast<int>(next_int());
  h.maxval = static_cast<int>(next_int());
  if (pos >= bytes.size() || !is_space(bytes[pos]))
    fail(ErrorCode::MalformedHeader, "missing whitespace after maxval");
  h.payload_offset = pos + 1;
  if (h.width < 1 || h.height < 1) fail(ErrorCode::MalformedHeader, "zero image dimension");
  if (h.maxval != 255) fail(ErrorCode::UnsupportedMaxval, "maxval must be 255, got " + std::to_string(h.maxval));
  return h;
}

std::vector<std::uint8_t> pnm_bytes(const char* magic, int w, int h, std::span<const std::uint8_t> payload) {
  std::string header = std::string(magic) + "\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

template <class T>
void put_le(std::vector<std::uint8_t>& out, T v) {
  using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::conditional_t<sizeof(T) == 2, std::uint16_t, std::uint8_t>>;
  U bits = std::bit_cast<U>(v);
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}

template <class T>
T get_le(const std::uint8_t* p) {
  using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::conditional_t<sizeof(T) == 2, std::uint16_t, std::uint8_t>>;
  U bits = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) bits |= static_cast<U>(static_cast<U>(p[i]) << (8 * i));
  return std::bit_cast<T>(bits);
}

}  // namespace

RasterImage::RasterImage(int w, int h) : width(w), height(h) {
  require(w >= 1 && h >= 1, ErrorCode::InvalidArgument, "image dimensions must be positive");
  data.assign(pixels() * kChannels, 0);
}

void RasterImage::validate() const {
  require(width >= 1 && height >= 1, ErrorCode::InvalidArgument, "image dimensions must be positive");
  require(data.size() == pixels() * kChannels, ErrorCode::InvalidArgument, "image data length mismatch");
}

LabelMap::LabelMap(int w, int h, std::uint8_t fill) : width(w), height(h) {
  require(w >= 1 && h >= 1, ErrorCode::InvalidArgument, "label map dimensions must be positive");
  labels.assign(pixels(), fill);
}

void LabelMap::validate() const {
  require(width >= 1 && height >= 1, ErrorCode::InvalidArgument, "label map dimensions must be positive");
  require(labels.size() == pixels(), ErrorCode::InvalidArgument, "label data length mismatch");
}

DType Tensor::dtype() const {
  switch (payload.index()) {
    case 0: return DType::F32;
    case 1: return DType::U16;
    default: return DType::U8;
  }
}

std::size_t Tensor::element_count() const {
  return std::visit([](const auto& v) { return v.size(); }, payload);
}

void Tensor::validate() const {
  require(!dims.empty() && dims.size() <= 4, ErrorCode::InvalidArgument, "tensor ndim must be 1..4");
  std::uint64_t n = 1;
  for (auto d : dims) {
    n *= d;
    require(n <= (std::uint64_t{1} << 40), ErrorCode::DimOverflow, "tensor too large");
  }
  require(n == element_count(), ErrorCode::InvalidArgument, "tensor payload length != product(dims)");
  if (dtype() == DType::F32) {
    for (float v : values<float>())
      require(std::isfinite(v), ErrorCode::NonFinite, "non-finite value in f32 tensor");
  }
}

Tensor Tensor::f32(std::vector<std::uint32_t> dims, std::vector<float> v) {
  Tensor t{std::move(dims), std::move(v)};
  t.validate();
  return t;
}
Tensor Tensor::u16(std::vector<std::uint32_t> dims, std::vector<std::uint16_t> v) {
  Tensor t{std::move(dims), std::move(v)};
  t.validate();
  return t;
}
Tensor Tensor::u8(std::vector<std::uint32_t> dims, std::vector<std::uint8_t> v) {
  Tensor t{std::move(dims), std::move(v)};
  t.validate();
  return t;
}

RasterImage load_ppm(const std::filesystem::path& path) {
  auto bytes = read_file(path);
  auto h = parse_pnm_header(bytes, "P6");
  if (bytes.size() - h.payload_offset < std::uint64_t{3} * h.width * h.height)
    fail(ErrorCode::TruncatedPayload, "PPM payload shorter than header claims: " + path.string());
  RasterImage img(h.width, h.height);
  std::memcpy(img.data.data(), bytes.data() + h.payload_offset, img.data.size());
  return img;
}

void save_ppm(const RasterImage& image, const std::filesystem::path& path) {
  image.validate();
  write_file(path, pnm_bytes("P6", image.width, image.height, image.data));
}

LabelMap load_label_pgm(const std::filesystem::path& path) {
  auto bytes = read_file(path);
  auto h = parse_pnm_header(bytes, "P5");
  if (bytes.size() - h.payload_offset < std::uint64_t{1} * h.width * h.height)
    fail(ErrorCode::TruncatedPayload, "PGM payload shorter than header claims: " + path.string());
  LabelMap map(h.width, h.height);
  std::memcpy(map.labels.data(), bytes.data() + h.payload_offset, map.labels.size());
  return map;
}

void save_label_pgm(const LabelMap& map, const std::filesystem::path& path) {
  map.validate();
  write_file(path, pnm_bytes("P5", map.width, map.height, map.labels));
}

std::vector<std::uint8_t> encode_tensor(const Tensor& t) {
  t.validate();
  std::vector<std::uint8_t> out = {'D', 'F', 'N', 'T', 1, static_cast<std::uint8_t>(t.dtype()),
                                   static_cast<std::uint8_t>(t.dims.size())};
  for (auto d : t.dims) put_le(out, d);
  std::visit([&](const auto& v) { for (auto x : v) put_le(out, x); }, t.payload);
  return out;
}

Tensor decode_tensor(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), "DFNT", 4) != 0) fail(ErrorCode::BadMagic, "not a DFNT tensor");
  if (bytes.size() < 7) fail(ErrorCode::TruncatedPayload, "DFNT header truncated");
  if (bytes[4] != 1) fail(ErrorCode::UnsupportedVersion, "unsupported DFNT version " + std::to_string(bytes[4]));
  const std::uint8_t code = bytes[5];
  const std::size_t ndim = bytes[6];
  if (code < 1 || code > 3) fail(ErrorCode::MalformedHeader, "unknown DFNT dtype code " + std::to_string(code));
  if (ndim < 1 || ndim > 4) fail(ErrorCode::MalformedHeader, "DFNT ndim must be 1..4");
  if (bytes.size() < 7 + 4 * ndim) fail(ErrorCode::TruncatedPayload, "DFNT dims truncated");

  Tensor t;
  std::uint64_t count = 1;
  for (std::size_t i = 0; i < ndim; ++i) {
    auto d = get_le<std::uint32_t>(bytes.data() + 7 + 4 * i);
    t.dims.push_back(d);
    count *= d;
    if (count > (std::uint64_t{1} << 40)) fail(ErrorCode::DimOverflow, "DFNT dims overflow");
  }
  const std::size_t elem = code == 1 ? 4 : code == 2 ? 2 : 1;
  const std::size_t offset = 7 + 4 * ndim;
  if (count > (bytes.size() - offset) / elem) fail(ErrorCode::TruncatedPayload, "DFNT payload truncated");
  const std::uint8_t* p = bytes.data() + offset;
  auto read_all = [&]<class T>(std::vector<T> v) {
    v.resize(count);
    for (std::size_t i = 0; i < count; ++i) v[i] = get_le<T>(p + i * sizeof(T));
    t.payload = std::move(v);
  };
  if (code == 1) read_all(std::vector<float>{});
  else if (code == 2) read_all(std::vector<std::uint16_t>{});
  else read_all(std::vector<std::uint8_t>{});
  t.validate();
  return t;
}

void save_tensor(const Tensor& t, const std::filesystem::path& path) { write_file(path, encode_tensor(t)); }

Tensor load_tensor(const std::filesystem::path& path) { return decode_tensor(read_file(path)); }

}  // namespace seedloop
