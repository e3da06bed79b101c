#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace chicle {

// ---------------------------------------------------------------------------
// Framing
//
//   "CHCL" magic (4 bytes) | version u8 | kind u8 | payload length u64 LE | payload
// ---------------------------------------------------------------------------

enum class MessageKind : std::uint8_t {
  Hello = 1,
  LoadPartition = 2,
  StartEpoch = 3,
  EpochResult = 4,
  SendPartitionTo = 5,
  ReceivePartition = 6,
  PartitionMoved = 7,
  ScaleComplete = 8,
  Shutdown = 9,
  Error = 10,
};

const char* kind_name(MessageKind kind) noexcept;

struct Message {
  MessageKind kind = MessageKind::Shutdown;
  std::vector<std::byte> payload;

  friend bool operator==(const Message&, const Message&) = default;
};

namespace frame {
inline constexpr std::uint8_t kMagic[4] = {'C', 'H', 'C', 'L'};
inline constexpr std::uint8_t kVersion = 1;
inline constexpr std::size_t kHeaderBytes = 14;
inline constexpr std::uint64_t kDefaultMaxPayload = std::uint64_t{1} << 30;
}  // namespace frame

// Max payload from CHICLE_MAX_FRAME (bytes), else 1 GiB.
std::uint64_t max_frame_from_env();

std::vector<std::byte> encode_frame(const Message& m, std::uint64_t max_payload = frame::kDefaultMaxPayload);

// Parses and validates a frame header; returns the declared payload length.
// Throws FrameError.
std::uint64_t parse_frame_header(std::span<const std::byte> header, MessageKind& kind,
                                 std::uint64_t max_payload);

// Decodes exactly one complete frame. Throws FrameError.
Message decode_frame(std::span<const std::byte> bytes,
                     std::uint64_t max_payload = frame::kDefaultMaxPayload);

// ---------------------------------------------------------------------------
// Little-endian payload helpers
// ---------------------------------------------------------------------------

class WireWriter {
 public:
  void u8(std::uint8_t v);
  void u16(std::uint16_t v);
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void f64(double v);
  void str(const std::string& s);
  void bytes(std::span<const std::byte> b);
  void f64s(std::span<const double> v);
  void u32s(std::span<const std::uint32_t> v);

  std::vector<std::byte> take() { return std::move(buf_); }

 private:
  template <typename T>
  void put(T v);
  std::vector<std::byte> buf_;
};

// Throws FrameError on truncation.
class WireReader {
 public:
  explicit WireReader(std::span<const std::byte> b) : buf_(b) {}

  std::uint8_t u8();
  std::uint16_t u16();
  std::uint32_t u32();
  std::uint64_t u64();
  double f64();
  std::string str();
  std::vector<double> f64s();
  std::vector<std::uint32_t> u32s();
  std::span<const std::byte> rest();

  void expect_end() const;

 private:
  template <typename T>
  T get();
  std::span<const std::byte> take(std::size_t n);

  std::span<const std::byte> buf_;
  std::size_t pos_ = 0;
};

// ---------------------------------------------------------------------------
// Typed payloads
// ---------------------------------------------------------------------------

// Worker -> driver on connect.
struct HelloRequest {
  std::uint16_t data_port = 0;
  friend bool operator==(const HelloRequest&, const HelloRequest&) = default;
};

// Driver -> worker in reply; carries the training constants.
struct HelloReply {
  std::uint32_t worker_id = 0;
  std::uint64_t num_examples = 0;
  std::uint64_t num_features = 0;
  double lambda = 0.01;
  double fraction = 1.0;
  double sigma_prime = 0.0;
  std::uint64_t seed = 0;
  friend bool operator==(const HelloReply&, const HelloReply&) = default;
};

enum EpochFlags : std::uint8_t { kTrain = 1, kEvaluate = 2 };

struct StartEpoch {
  std::uint64_t epoch = 0;
  std::uint32_t workers = 1;
  std::uint8_t flags = 0;
  std::vector<double> v;
  friend bool operator==(const StartEpoch&, const StartEpoch&) = default;
};

struct EpochResult {
  std::uint64_t epoch = 0;
  std::uint8_t flags = 0;
  std::uint64_t coordinates_visited = 0;
  double hinge_sum = 0.0;
  double dual_linear_sum = 0.0;
  std::vector<double> delta_v;
  friend bool operator==(const EpochResult&, const EpochResult&) = default;
};

// Driver -> leaving worker: open a data channel to `host:port` and push the
// listed partitions as LoadPartition frames.
struct SendPartitionTo {
  std::uint32_t to_worker = 0;
  std::string host;
  std::uint16_t port = 0;
  std::vector<std::uint32_t> partitions;
  friend bool operator==(const SendPartitionTo&, const SendPartitionTo&) = default;
};

// Driver -> surviving worker: accept the listed partitions from one sender.
struct ReceivePartition {
  std::uint32_t from_worker = 0;
  std::vector<std::uint32_t> partitions;
  friend bool operator==(const ReceivePartition&, const ReceivePartition&) = default;
};

// Worker -> driver acknowledgement for either side of a move.
struct PartitionMoved {
  std::vector<std::uint32_t> partitions;
  std::uint64_t bytes = 0;  // partition image bytes sent or received
  friend bool operator==(const PartitionMoved&, const PartitionMoved&) = default;
};

struct ScaleComplete {
  std::uint32_t workers = 0;
  friend bool operator==(const ScaleComplete&, const ScaleComplete&) = default;
};

Message to_message(const HelloRequest& m);
Message to_message(const HelloReply& m);
Message to_message(const StartEpoch& m);
Message to_message(const EpochResult& m);
Message to_message(const SendPartitionTo& m);
Message to_message(const ReceivePartition& m);
Message to_message(const PartitionMoved& m);
Message to_message(const ScaleComplete& m);
Message load_partition_message(std::span<const std::byte> image);
Message shutdown_message();
Message error_message(const std::string& what);

// Each throws FrameError if the kind does not match or the payload is short.
HelloRequest as_hello_request(const Message& m);
HelloReply as_hello_reply(const Message& m);
StartEpoch as_start_epoch(const Message& m);
EpochResult as_epoch_result(const Message& m);
SendPartitionTo as_send_partition_to(const Message& m);
ReceivePartition as_receive_partition(const Message& m);
PartitionMoved as_partition_moved(const Message& m);
ScaleComplete as_scale_complete(const Message& m);
std::string as_error(const Message& m);

// ---------------------------------------------------------------------------
// Byte streams
// ---------------------------------------------------------------------------

// Owning TCP (or socketpair) stream. Move-only.
class Connection {
 public:
  Connection() = default;
  explicit Connection(int fd, std::uint64_t max_payload = max_frame_from_env());
  Connection(Connection&& other) noexcept;
  Connection& operator=(Connection&& other) noexcept;
  Connection(const Connection&) = delete;
  Connection& operator=(const Connection&) = delete;
  ~Connection();

  bool is_open() const noexcept { return fd_ >= 0; }
  int fd() const noexcept { return fd_; }

  // Throws ConnectionLost / FrameError.
  void send(const Message& m);
  Message receive();

  // Peer IPv4/IPv6 address as text.
  std::string peer_host() const;

  void close() noexcept;

 private:
  void write_all(std::span<const std::byte> b);
  void read_exact(std::span<std::byte> b);

  int fd_ = -1;
  std::uint64_t max_payload_ = frame::kDefaultMaxPayload;
};

class Listener {
 public:
  // "host:port"; port 0 picks an ephemeral port. Throws ConnectionLost.
  explicit Listener(const std::string& address);
  Listener(Listener&& other) noexcept;
  Listener& operator=(Listener&& other) noexcept;
  Listener(const Listener&) = delete;
  Listener& operator=(const Listener&) = delete;
  ~Listener();

  std::uint16_t port() const noexcept { return port_; }
  Connection accept();

 private:
  int fd_ = -1;
  std::uint16_t port_ = 0;
};

Connection connect_to(const std::string& host, std::uint16_t port);
Connection connect_to(const std::string& address);

// Both ends of a connected local stream socket pair.
std::pair<Connection, Connection> connection_pair();

struct HostPort {
  std::string host;
  std::uint16_t port = 0;
};
// Throws std::invalid_argument.
HostPort parse_address(const std::string& address);

// ---------------------------------------------------------------------------
// Scale-in data movement
// ---------------------------------------------------------------------------

struct PartitionMove {
  std::uint32_t partition = 0;
  std::uint32_t from = 0;
  std::uint32_t to = 0;
  friend bool operator==(const PartitionMove&, const PartitionMove&) = default;
};

// All partitions one sender pushes to one receiver over a single channel.
struct PairTransfer {
  std::uint32_t from = 0;
  std::uint32_t to = 0;
  std::vector<std::uint32_t> partitions;
};

struct TransferPlan {
  std::vector<PartitionMove> moves;
  // Waves run one after another; inside a wave no worker appears twice.
  std::vector<std::vector<PairTransfer>> waves;
  std::size_t parallelism = 0;  // largest wave
};

// Survivors are workers [0, to_workers). Each leaving worker j sends its
// partitions to survivor j mod to_workers (spilling to the next survivor with
// room if that one is full), so survivors never exchange data among
// themselves. Throws InvalidTransition.
TransferPlan plan_transfer(std::span<const std::uint32_t> assignment, std::size_t from_workers,
                           std::size_t to_workers);

std::vector<std::uint32_t> apply_transfer(std::span<const std::uint32_t> assignment,
                                          const TransferPlan& plan);

}  // namespace chicle
