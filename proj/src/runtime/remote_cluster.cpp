#include <iostream>
#include <string>

#include "chicle/errors.hpp"
#include "chicle/runtime.hpp"

namespace chicle {

std::unique_ptr<RemoteCluster> RemoteCluster::start(Listener& listener, std::size_t workers,
                                                    const WorkerParams& params,
                                                    std::span<const PartitionBuffer> partitions,
                                                    std::span<const std::uint32_t> assignment) {
  std::vector<Peer> peers;
  peers.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    Peer peer;
    peer.control = listener.accept();
    const auto hello = as_hello_request(peer.control.receive());
    peer.data_host = peer.control.peer_host();
    peer.data_port = hello.data_port;

    HelloReply reply;
    reply.worker_id = static_cast<std::uint32_t>(w);
    reply.num_examples = params.num_examples;
    reply.num_features = params.num_features;
    reply.lambda = params.lambda;
    reply.fraction = params.fraction;
    reply.sigma_prime = params.sigma_prime;
    reply.seed = params.seed;
    peer.control.send(to_message(reply));
    peers.push_back(std::move(peer));
  }
  for (const auto& p : partitions) peers.at(assignment[p.id()]).control.send(load_partition_message(p.bytes()));
  return std::make_unique<RemoteCluster>(std::move(peers));
}

RemoteCluster::~RemoteCluster() {
  try {
    shutdown();
  } catch (...) {
  }
}

Message RemoteCluster::expect(std::size_t worker, MessageKind kind) {
  Message m;
  try {
    m = peers_[worker].control.receive();
  } catch (const Error& e) {
    throw WorkerFailure("worker " + std::to_string(worker) + ": " + e.what());
  }
  if (m.kind == MessageKind::Error)
    throw WorkerFailure("worker " + std::to_string(worker) + " reported: " + as_error(m));
  if (m.kind != kind)
    throw WorkerFailure("worker " + std::to_string(worker) + " sent " + kind_name(m.kind) + ", expected " +
                        kind_name(kind));
  return m;
}

std::vector<EpochResult> RemoteCluster::round(const SharedVector& v, std::uint64_t epoch, std::uint8_t flags) {
  StartEpoch start;
  start.epoch = epoch;
  start.workers = static_cast<std::uint32_t>(peers_.size());
  start.flags = flags;
  start.v = v.values;
  const Message msg = to_message(start);
  for (std::size_t w = 0; w < peers_.size(); ++w) {
    try {
      peers_[w].control.send(msg);
    } catch (const Error& e) {
      throw WorkerFailure("worker " + std::to_string(w) + ": " + e.what());
    }
  }
  std::vector<EpochResult> out;
  out.reserve(peers_.size());
  for (std::size_t w = 0; w < peers_.size(); ++w) out.push_back(as_epoch_result(expect(w, MessageKind::EpochResult)));
  return out;
}

std::vector<LocalUpdate> RemoteCluster::train(const SharedVector& v, std::uint64_t epoch) {
  std::vector<LocalUpdate> out;
  for (auto& r : round(v, epoch, kTrain)) {
    if (r.delta_v.size() != v.size()) throw WorkerFailure("update has the wrong dimension");
    out.push_back({std::move(r.delta_v), r.coordinates_visited});
  }
  return out;
}

std::vector<PartialObjectives> RemoteCluster::evaluate(const SharedVector& v) {
  std::vector<PartialObjectives> out;
  for (const auto& r : round(v, 0, kEvaluate)) out.push_back({r.hinge_sum, r.dual_linear_sum});
  return out;
}

std::uint64_t RemoteCluster::scale_in(const TransferPlan& plan, std::size_t to_workers) {
  std::uint64_t bytes = 0;
  try {
    for (const auto& wave : plan.waves) {
      for (const auto& pair : wave) {
        peers_.at(pair.to).control.send(to_message(ReceivePartition{pair.from, pair.partitions}));
        SendPartitionTo send;
        send.to_worker = pair.to;
        send.host = peers_[pair.to].data_host;
        send.port = peers_[pair.to].data_port;
        send.partitions = pair.partitions;
        peers_.at(pair.from).control.send(to_message(send));
      }
      for (const auto& pair : wave) {
        const auto sent = as_partition_moved(expect(pair.from, MessageKind::PartitionMoved));
        const auto received = as_partition_moved(expect(pair.to, MessageKind::PartitionMoved));
        if (sent.partitions != pair.partitions || received.partitions != pair.partitions)
          throw TransferFailure("workers acknowledged the wrong partitions");
        if (sent.bytes != received.bytes)
          throw TransferFailure("sent " + std::to_string(sent.bytes) + " bytes but received " +
                                std::to_string(received.bytes));
        bytes += sent.bytes;
      }
    }
  } catch (const TransferFailure&) {
    throw;
  } catch (const Error& e) {
    throw TransferFailure(std::string("partition move failed: ") + e.what());
  }

  for (std::size_t w = to_workers; w < peers_.size(); ++w) {
    try {
      peers_[w].control.send(shutdown_message());
    } catch (const Error&) {
    }
  }
  peers_.erase(peers_.begin() + static_cast<std::ptrdiff_t>(to_workers), peers_.end());
  for (auto& p : peers_) p.control.send(to_message(ScaleComplete{static_cast<std::uint32_t>(to_workers)}));
  return bytes;
}

void RemoteCluster::shutdown() {
  for (auto& p : peers_) {
    if (!p.control.is_open()) continue;
    try {
      p.control.send(shutdown_message());
    } catch (const Error&) {
    }
    p.control.close();
  }
}

}  // namespace chicle
