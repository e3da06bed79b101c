#include <chrono>
#include <string>
#include <thread>

#include "chicle/errors.hpp"
#include "chicle/runtime.hpp"

namespace chicle {
namespace {

void handle_epoch(Worker& worker, Connection& driver, const StartEpoch& start) {
  SharedVector v;
  v.values = start.v;
  if (v.size() != worker.params().num_features) throw FrameError("shared vector has the wrong dimension");
  EpochResult result;
  result.epoch = start.epoch;
  result.flags = start.flags;
  if (start.flags & kTrain) {
    auto update = worker.train(v, start.epoch, start.workers);
    result.coordinates_visited = update.coordinates_visited;
    result.delta_v = std::move(update.delta_v);
  }
  if (start.flags & kEvaluate) {
    const auto partial = worker.evaluate(v);
    result.hinge_sum = partial.hinge_sum;
    result.dual_linear_sum = partial.dual_linear_sum;
  }
  driver.send(to_message(result));
}

void receive_partitions(Worker& worker, Connection& driver, Listener& data, const ReceivePartition& req) {
  Connection peer = data.accept();
  PartitionMoved ack;
  for (std::size_t i = 0; i < req.partitions.size(); ++i) {
    const Message m = peer.receive();
    if (m.kind != MessageKind::LoadPartition)
      throw FrameError(std::string("expected LoadPartition on data channel, got ") + kind_name(m.kind));
    auto part = decode_partition(m.payload);
    ack.partitions.push_back(part.id());
    ack.bytes += m.payload.size();
    worker.add_partition(std::move(part));
  }
  driver.send(to_message(ack));
}

void send_partitions(Worker& worker, Connection& driver, const SendPartitionTo& req) {
  Connection peer = connect_to(req.host, req.port);
  PartitionMoved ack;
  for (const auto id : req.partitions) {
    const PartitionBuffer part = worker.take_partition(id);
    peer.send(load_partition_message(part.bytes()));
    ack.partitions.push_back(id);
    ack.bytes += part.bytes().size();
  }
  driver.send(to_message(ack));
}

// The driver may not be listening yet when a worker starts.
Connection connect_with_retry(const std::string& address, double timeout) {
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::duration<double>(timeout);
  for (;;) {
    try {
      return connect_to(address);
    } catch (const ConnectionLost&) {
      if (std::chrono::steady_clock::now() >= deadline) throw;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(100));
  }
}

}  // namespace

void run_worker(const WorkerOptions& options) {
  Listener data(options.listen);
  Connection driver = connect_with_retry(options.driver, options.connect_timeout);
  driver.send(to_message(HelloRequest{data.port()}));
  const HelloReply hello = as_hello_reply(driver.receive());

  WorkerParams params;
  params.num_examples = hello.num_examples;
  params.num_features = hello.num_features;
  params.lambda = hello.lambda;
  params.fraction = hello.fraction;
  params.sigma_prime = hello.sigma_prime;
  params.seed = hello.seed;
  Worker worker(hello.worker_id, params);

  for (;;) {
    const Message m = driver.receive();
    try {
      switch (m.kind) {
        case MessageKind::LoadPartition:
          worker.add_partition(decode_partition(m.payload));
          break;
        case MessageKind::StartEpoch:
          handle_epoch(worker, driver, as_start_epoch(m));
          break;
        case MessageKind::ReceivePartition:
          receive_partitions(worker, driver, data, as_receive_partition(m));
          break;
        case MessageKind::SendPartitionTo:
          send_partitions(worker, driver, as_send_partition_to(m));
          break;
        case MessageKind::ScaleComplete:
          as_scale_complete(m);
          break;
        case MessageKind::Shutdown:
          return;
        default:
          throw FrameError(std::string("unexpected ") + kind_name(m.kind) + " message from driver");
      }
    } catch (const ConnectionLost&) {
      throw;
    } catch (const std::exception& e) {
      try {
        driver.send(error_message(e.what()));
      } catch (const Error&) {
      }
      throw;
    }
  }
}

}  // namespace chicle
