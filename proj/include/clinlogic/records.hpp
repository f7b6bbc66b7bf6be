// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The clinlogic Authors

#pragma once

#include <iosfwd>
#include <string>

#include "clinlogic/graph.hpp"

namespace clinlogic {

// JSONL record stream:
//   {"op":"node","kind":K,"attrs":{...}}
//   {"op":"edge","src":<int>,"dst":<int>,"rel":R,"t":<int>}
// Node ids are 0-based insertion order. Blank lines are ignored.
GraphStats ingest(ClinicalGraph& graph, std::istream& in);
GraphStats ingest(ClinicalGraph& graph, const std::string& path);

// Writes every node in id order, then every live edge in id order. Output is
// byte-deterministic for a given graph.
void export_records(const ClinicalGraph& graph, std::ostream& out);
void export_records(const ClinicalGraph& graph, const std::string& path);

}  // namespace clinlogic
