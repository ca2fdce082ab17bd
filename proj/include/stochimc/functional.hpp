#pragma once

#include <map>
#include <string>
#include <vector>

#include "stochimc/bitstream.hpp"
#include "stochimc/netlist.hpp"
#include "stochimc/random.hpp"

namespace stochimc {

using StreamMap = std::map<NetId, Bitstream>;

// Values for variable primary inputs, keyed by net name.
using InputValues = std::map<std::string, double>;

// Materializes every primary input: variables from `values`, constants from their declared
// probability. Independent inputs draw from a per-net child of `source`; inputs sharing a
// lineage draw from the same lineage sequence of `source`.
StreamMap bind_inputs(const Netlist& netlist, const InputValues& values, std::size_t length,
                      const RandomSource& source);

// Flips each bit independently with probability `rate`; the decision for bit i is a pure
// function of (source, i).
void inject_flips(Bitstream& bs, double rate, const RandomSource& source);

// Bit flips applied to selected nets right after they are produced, so every consumer sees the
// perturbed value. Flip decisions are keyed by net name.
struct NetFaults {
  double rate = 0.0;
  std::vector<NetId> nets;
  RandomSource source;
};

RandomSource fault_source_for(const RandomSource& base, const std::string& node);

// Golden model. Position-parallel unless the netlist holds STATE gates, in which case bit
// positions are evaluated in order and each STATE latches its input after every position.
// Returns the stream of every net, indexed by NetId.
std::vector<Bitstream> simulate_nets(const Netlist& netlist, const StreamMap& inputs,
                                     const NetFaults* faults = nullptr);

StreamMap simulate_functional(const Netlist& netlist, const StreamMap& inputs, const NetFaults* faults = nullptr);

}  // namespace stochimc
