// Versioned, self-describing, text-based column files for caching flows and
// field histories between runs.
#pragma once

#include <iosfwd>
#include <string>

#include "lyh/heat.hpp"

namespace lyh {

void write_flow(std::ostream& os, const FlowSolution& flow);
FlowSolution read_flow(std::istream& is);

void write_history(std::ostream& os, const FieldHistory& h);
// The flow is reattached on read (the file stores the background spec and
// the reader validates it against the given flow).
FieldHistory read_history(std::istream& is, FlowPtr flow);

void write_flow_file(const std::string& path, const FlowSolution& flow);
FlowSolution read_flow_file(const std::string& path);
void write_history_file(const std::string& path, const FieldHistory& h);
FieldHistory read_history_file(const std::string& path, FlowPtr flow);

}  // namespace lyh
