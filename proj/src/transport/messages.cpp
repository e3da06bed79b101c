#include <cstdlib>
#include <cstring>
#include <string>

#include "chicle/errors.hpp"
#include "chicle/transport.hpp"

namespace chicle {
namespace {

template <typename T>
void store(std::byte* dst, T v) {
  std::memcpy(dst, &v, sizeof(T));
}

template <typename T>
T load(const std::byte* src) {
  T v;
  std::memcpy(&v, src, sizeof(T));
  return v;
}

bool known_kind(std::uint8_t k) {
  return k >= static_cast<std::uint8_t>(MessageKind::Hello) &&
         k <= static_cast<std::uint8_t>(MessageKind::Error);
}

void expect_kind(const Message& m, MessageKind kind) {
  if (m.kind != kind)
    throw FrameError(std::string("expected ") + kind_name(kind) + " message, got " + kind_name(m.kind));
}

}  // namespace

const char* kind_name(MessageKind kind) noexcept {
  switch (kind) {
    case MessageKind::Hello: return "Hello";
    case MessageKind::LoadPartition: return "LoadPartition";
    case MessageKind::StartEpoch: return "StartEpoch";
    case MessageKind::EpochResult: return "EpochResult";
    case MessageKind::SendPartitionTo: return "SendPartitionTo";
    case MessageKind::ReceivePartition: return "ReceivePartition";
    case MessageKind::PartitionMoved: return "PartitionMoved";
    case MessageKind::ScaleComplete: return "ScaleComplete";
    case MessageKind::Shutdown: return "Shutdown";
    case MessageKind::Error: return "Error";
  }
  return "Unknown";
}

std::uint64_t max_frame_from_env() {
  const char* env = std::getenv("CHICLE_MAX_FRAME");
  if (env == nullptr || *env == '\0') return frame::kDefaultMaxPayload;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(env, &end, 10);
  if (end == env || *end != '\0' || v == 0) return frame::kDefaultMaxPayload;
  return v;
}

std::vector<std::byte> encode_frame(const Message& m, std::uint64_t max_payload) {
  if (m.payload.size() > max_payload)
    throw FrameError("payload of " + std::to_string(m.payload.size()) + " bytes exceeds frame limit");
  std::vector<std::byte> out(frame::kHeaderBytes + m.payload.size());
  std::memcpy(out.data(), frame::kMagic, 4);
  out[4] = static_cast<std::byte>(frame::kVersion);
  out[5] = static_cast<std::byte>(m.kind);
  store<std::uint64_t>(out.data() + 6, m.payload.size());
  if (!m.payload.empty()) std::memcpy(out.data() + frame::kHeaderBytes, m.payload.data(), m.payload.size());
  return out;
}

std::uint64_t parse_frame_header(std::span<const std::byte> header, MessageKind& kind,
                                 std::uint64_t max_payload) {
  if (header.size() < frame::kHeaderBytes) throw FrameError("truncated frame header");
  if (std::memcmp(header.data(), frame::kMagic, 4) != 0) throw FrameError("bad frame magic");
  if (static_cast<std::uint8_t>(header[4]) != frame::kVersion) throw FrameError("unsupported frame version");
  const auto k = static_cast<std::uint8_t>(header[5]);
  if (!known_kind(k)) throw FrameError("unknown message kind " + std::to_string(k));
  const auto len = load<std::uint64_t>(header.data() + 6);
  if (len > max_payload)
    throw FrameError("declared payload of " + std::to_string(len) + " bytes exceeds frame limit");
  kind = static_cast<MessageKind>(k);
  return len;
}

Message decode_frame(std::span<const std::byte> bytes, std::uint64_t max_payload) {
  Message m;
  const auto len = parse_frame_header(bytes, m.kind, max_payload);
  if (bytes.size() - frame::kHeaderBytes != len) throw FrameError("frame length does not match payload");
  m.payload.assign(bytes.begin() + frame::kHeaderBytes, bytes.end());
  return m;
}

// --- WireWriter / WireReader ---------------------------------------------------

template <typename T>
void WireWriter::put(T v) {
  const auto at = buf_.size();
  buf_.resize(at + sizeof(T));
  store<T>(buf_.data() + at, v);
}

void WireWriter::u8(std::uint8_t v) { put(v); }
void WireWriter::u16(std::uint16_t v) { put(v); }
void WireWriter::u32(std::uint32_t v) { put(v); }
void WireWriter::u64(std::uint64_t v) { put(v); }
void WireWriter::f64(double v) { put(v); }

void WireWriter::str(const std::string& s) {
  u32(static_cast<std::uint32_t>(s.size()));
  bytes(std::as_bytes(std::span(s.data(), s.size())));
}

void WireWriter::bytes(std::span<const std::byte> b) { buf_.insert(buf_.end(), b.begin(), b.end()); }

void WireWriter::f64s(std::span<const double> v) {
  u64(v.size());
  bytes(std::as_bytes(v));
}

void WireWriter::u32s(std::span<const std::uint32_t> v) {
  u32(static_cast<std::uint32_t>(v.size()));
  bytes(std::as_bytes(v));
}

std::span<const std::byte> WireReader::take(std::size_t n) {
  if (n > buf_.size() - pos_) throw FrameError("payload truncated");
  const auto out = buf_.subspan(pos_, n);
  pos_ += n;
  return out;
}

template <typename T>
T WireReader::get() {
  return load<T>(take(sizeof(T)).data());
}

std::uint8_t WireReader::u8() { return get<std::uint8_t>(); }
std::uint16_t WireReader::u16() { return get<std::uint16_t>(); }
std::uint32_t WireReader::u32() { return get<std::uint32_t>(); }
std::uint64_t WireReader::u64() { return get<std::uint64_t>(); }
double WireReader::f64() { return get<double>(); }

std::string WireReader::str() {
  const auto n = u32();
  const auto b = take(n);
  return {reinterpret_cast<const char*>(b.data()), b.size()};
}

std::vector<double> WireReader::f64s() {
  const auto n = u64();
  if (n > (buf_.size() - pos_) / sizeof(double)) throw FrameError("payload truncated");
  const auto b = take(n * sizeof(double));
  std::vector<double> out(n);
  if (n > 0) std::memcpy(out.data(), b.data(), b.size());
  return out;
}

std::vector<std::uint32_t> WireReader::u32s() {
  const auto n = u32();
  if (n > (buf_.size() - pos_) / sizeof(std::uint32_t)) throw FrameError("payload truncated");
  const auto b = take(std::size_t{n} * sizeof(std::uint32_t));
  std::vector<std::uint32_t> out(n);
  if (n > 0) std::memcpy(out.data(), b.data(), b.size());
  return out;
}

std::span<const std::byte> WireReader::rest() { return take(buf_.size() - pos_); }

void WireReader::expect_end() const {
  if (pos_ != buf_.size()) throw FrameError("trailing bytes in payload");
}

// --- typed payloads ----------------------------------------------------------

Message to_message(const HelloRequest& m) {
  WireWriter w;
  w.u16(m.data_port);
  return {MessageKind::Hello, w.take()};
}

Message to_message(const HelloReply& m) {
  WireWriter w;
  w.u32(m.worker_id);
  w.u64(m.num_examples);
  w.u64(m.num_features);
  w.f64(m.lambda);
  w.f64(m.fraction);
  w.f64(m.sigma_prime);
  w.u64(m.seed);
  return {MessageKind::Hello, w.take()};
}

Message to_message(const StartEpoch& m) {
  WireWriter w;
  w.u64(m.epoch);
  w.u32(m.workers);
  w.u8(m.flags);
  w.f64s(m.v);
  return {MessageKind::StartEpoch, w.take()};
}

Message to_message(const EpochResult& m) {
  WireWriter w;
  w.u64(m.epoch);
  w.u8(m.flags);
  w.u64(m.coordinates_visited);
  w.f64(m.hinge_sum);
  w.f64(m.dual_linear_sum);
  w.f64s(m.delta_v);
  return {MessageKind::EpochResult, w.take()};
}

Message to_message(const SendPartitionTo& m) {
  WireWriter w;
  w.u32(m.to_worker);
  w.str(m.host);
  w.u16(m.port);
  w.u32s(m.partitions);
  return {MessageKind::SendPartitionTo, w.take()};
}

Message to_message(const ReceivePartition& m) {
  WireWriter w;
  w.u32(m.from_worker);
  w.u32s(m.partitions);
  return {MessageKind::ReceivePartition, w.take()};
}

Message to_message(const PartitionMoved& m) {
  WireWriter w;
  w.u32s(m.partitions);
  w.u64(m.bytes);
  return {MessageKind::PartitionMoved, w.take()};
}

Message to_message(const ScaleComplete& m) {
  WireWriter w;
  w.u32(m.workers);
  return {MessageKind::ScaleComplete, w.take()};
}

Message load_partition_message(std::span<const std::byte> image) {
  return {MessageKind::LoadPartition, {image.begin(), image.end()}};
}

Message shutdown_message() { return {MessageKind::Shutdown, {}}; }

Message error_message(const std::string& what) {
  WireWriter w;
  w.str(what);
  return {MessageKind::Error, w.take()};
}

HelloRequest as_hello_request(const Message& m) {
  expect_kind(m, MessageKind::Hello);
  WireReader r(m.payload);
  HelloRequest out{r.u16()};
  r.expect_end();
  return out;
}

HelloReply as_hello_reply(const Message& m) {
  expect_kind(m, MessageKind::Hello);
  WireReader r(m.payload);
  HelloReply out;
  out.worker_id = r.u32();
  out.num_examples = r.u64();
  out.num_features = r.u64();
  out.lambda = r.f64();
  out.fraction = r.f64();
  out.sigma_prime = r.f64();
  out.seed = r.u64();
  r.expect_end();
  return out;
}

StartEpoch as_start_epoch(const Message& m) {
  expect_kind(m, MessageKind::StartEpoch);
  WireReader r(m.payload);
  StartEpoch out;
  out.epoch = r.u64();
  out.workers = r.u32();
  out.flags = r.u8();
  out.v = r.f64s();
  r.expect_end();
  return out;
}

EpochResult as_epoch_result(const Message& m) {
  expect_kind(m, MessageKind::EpochResult);
  WireReader r(m.payload);
  EpochResult out;
  out.epoch = r.u64();
  out.flags = r.u8();
  out.coordinates_visited = r.u64();
  out.hinge_sum = r.f64();
  out.dual_linear_sum = r.f64();
  out.delta_v = r.f64s();
  r.expect_end();
  return out;
}

SendPartitionTo as_send_partition_to(const Message& m) {
  expect_kind(m, MessageKind::SendPartitionTo);
  WireReader r(m.payload);
  SendPartitionTo out;
  out.to_worker = r.u32();
  out.host = r.str();
  out.port = r.u16();
  out.partitions = r.u32s();
  r.expect_end();
  return out;
}

ReceivePartition as_receive_partition(const Message& m) {
  expect_kind(m, MessageKind::ReceivePartition);
  WireReader r(m.payload);
  ReceivePartition out;
  out.from_worker = r.u32();
  out.partitions = r.u32s();
  r.expect_end();
  return out;
}

PartitionMoved as_partition_moved(const Message& m) {
  expect_kind(m, MessageKind::PartitionMoved);
  WireReader r(m.payload);
  PartitionMoved out;
  out.partitions = r.u32s();
  out.bytes = r.u64();
  r.expect_end();
  return out;
}

ScaleComplete as_scale_complete(const Message& m) {
  expect_kind(m, MessageKind::ScaleComplete);
  WireReader r(m.payload);
  ScaleComplete out{r.u32()};
  r.expect_end();
  return out;
}

std::string as_error(const Message& m) {
  expect_kind(m, MessageKind::Error);
  WireReader r(m.payload);
  auto s = r.str();
  r.expect_end();
  return s;
}

}  // namespace chicle
