#include "pafa/executor.hpp"

#include <algorithm>
#include <cmath>

namespace pafa::exec {

const char* to_string(Role role) { return role == Role::Live ? "Live" : "Verification"; }

UnitProgram program_for(const Configuration& config, const std::string& device) {
  UnitProgram p;
  p.config = to_hex(config.digest());
  if (auto s = config.schedules.find(device); s != config.schedules.end()) p.schedule = s->second;
  if (auto t = config.routing_tables.find(device); t != config.routing_tables.end()) p.table = t->second;
  for (const auto& a : config.assignments) {
    if (a.device == device) p.tasks[a.key()] = {a.kind, a.parameter};
  }
  return p;
}

double compute(const TaskBody& body, const std::vector<double>& in) {
  using oaam::TaskKind;
  switch (body.kind) {
    case TaskKind::Source:
    case TaskKind::Const: return body.parameter;
    case TaskKind::Gain: return in.at(0) * body.parameter;
    case TaskKind::Add: return in.at(0) + in.at(1);
    case TaskKind::Limit: return std::clamp(in.at(0), -std::abs(body.parameter), std::abs(body.parameter));
    case TaskKind::Monitor: return std::abs(in.at(0) - in.at(1)) <= body.parameter ? 1.0 : 0.0;
    case TaskKind::Sink: return in.at(0);
  }
  return 0.0;
}

void ExecutionUnit::load_configuration(UnitProgram program, std::int64_t cycle) {
  const auto& slots = program.table.slots;
  for (const auto& s : slots) {
    if (!program.tasks.count(s.task)) throw Error(ErrorKind::MalformedTable, "slot for unknown task " + s.task);
  }
  for (const auto& e : program.table.entries) {
    if (!program.tasks.count(e.src_task)) throw Error(ErrorKind::MalformedTable, e.signal + ": unknown source task");
    if (e.network) {
      if (e.dst_device.empty()) throw Error(ErrorKind::MalformedTable, e.signal + ": network entry without destination");
    } else if (e.slot < 0 || e.slot >= static_cast<int>(slots.size())) {
      throw Error(ErrorKind::MalformedTable, e.signal + ": buffer slot " + std::to_string(e.slot) + " does not exist");
    }
  }
  for (const auto& frame : program.schedule.frames) {
    for (const auto& entry : frame) {
      if (!program.tasks.count(entry.task)) throw Error(ErrorKind::MalformedTable, "scheduled task " + entry.task + " has no body");
    }
  }
  pending_ = std::move(program);
  pending_from_ = cycle + 1;
}

void ExecutionUnit::unload() {
  active_.reset();
  pending_.reset();
  buffers_.clear();
  slot_of_.clear();
}

std::optional<std::string> ExecutionUnit::config_at(std::int64_t cycle) const {
  if (pending_ && cycle >= pending_from_) return pending_->config;
  if (active_) return active_->config;
  return std::nullopt;
}

void ExecutionUnit::activate_pending(std::int64_t cycle) {
  if (!pending_ || cycle < pending_from_) return;
  active_ = std::move(pending_);
  pending_.reset();
  buffers_.assign(active_->table.slots.size(), std::nullopt);
  slot_of_.clear();
  for (std::size_t i = 0; i < active_->table.slots.size(); ++i) {
    slot_of_[{active_->table.slots[i].task, active_->table.slots[i].port}] = static_cast<int>(i);
  }
}

CycleTrace ExecutionUnit::execute_cycle(std::int64_t cycle, const std::vector<Message>& inbox) {
  activate_pending(cycle);
  CycleTrace trace;
  trace.cycle = cycle;
  trace.role = role_;
  if (!active_) return trace;
  const auto& prog = *active_;
  trace.config = prog.config;

  for (const auto& m : inbox) {
    if (m.config != prog.config) continue;
    auto it = slot_of_.find({m.dst_task, m.dst_port});
    if (it != slot_of_.end()) buffers_[it->second] = m.value;
  }
  if (prog.schedule.frames.empty()) return trace;

  auto frame = prog.schedule.frames[cycle % static_cast<std::int64_t>(prog.schedule.frames.size())];
  std::stable_sort(frame.begin(), frame.end(), [](const auto& a, const auto& b) { return a.offset < b.offset; });
  for (const auto& entry : frame) {
    const auto& body = prog.tasks.at(entry.task);
    std::vector<double> inputs;
    bool ready = true;
    for (int p = 0; p < oaam::input_ports(body.kind); ++p) {
      auto it = slot_of_.find({entry.task, p});
      if (it == slot_of_.end() || !buffers_[it->second]) {
        ready = false;
        break;
      }
      inputs.push_back(*buffers_[it->second]);
    }
    if (!ready) {
      trace.executed.push_back({entry.task, entry.offset, std::nullopt});
      continue;
    }
    double value = compute(body, inputs);
    trace.executed.push_back({entry.task, entry.offset, value});
    if (body.kind == oaam::TaskKind::Sink) {
      trace.sinks.push_back({entry.task, value});
      // The actuator command is an outgoing signal as well.
      if (role_ == Role::Verification) {
        trace.suppressed.push_back({entry.task + ":out", "", "", entry.task, 0, value, prog.config, {}});
      }
      continue;
    }
    for (const auto& e : prog.table.entries) {
      if (e.src_task != entry.task) continue;
      if (!e.network) {
        buffers_[e.slot] = value;
        continue;
      }
      Message m{e.signal, "", e.dst_device, e.dst_task, e.dst_port, value, prog.config, e.route};
      if (role_ == Role::Live) {
        trace.emitted.push_back(std::move(m));
      } else {
        trace.suppressed.push_back(std::move(m));
      }
    }
  }
  return trace;
}

void ModuleUnits::set_switch(std::int64_t activation_cycle, std::int64_t current_cycle) {
  if (activation_cycle <= current_cycle) {
    throw Error(ErrorKind::PastCycle, "activation " + std::to_string(activation_cycle) + " is not after cycle " +
                                          std::to_string(current_cycle));
  }
  switch_at_ = activation_cycle;
}

bool ModuleUnits::begin_cycle(std::int64_t cycle) {
  if (!switch_at_ || *switch_at_ != cycle) return false;
  switch_at_.reset();
  live_ = 1 - live_;
  units_[live_].set_role(Role::Live);
  units_[1 - live_].set_role(Role::Verification);
  units_[1 - live_].unload();
  return true;
}

}  // namespace pafa::exec
