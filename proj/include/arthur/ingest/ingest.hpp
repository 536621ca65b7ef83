#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "arthur/core/model.hpp"
#include "arthur/core/validate.hpp"

namespace arthur::ingest {

/// Canonical BoP + BoM, the shape authoring and assembly consume.
struct ProcessDocument {
  std::string id;
  std::string name;
  std::vector<Task> tasks;  // BoP order
  std::map<std::string, Item> parts;
  std::map<std::string, Item> tools;
  /// Agent hints: ids named by <agent> declarations or operation agent attributes, sorted.
  std::vector<std::string> agents;
};

json to_json(const ProcessDocument& d);
/// Throws Error(load) with a JSON pointer for malformed documents.
ProcessDocument process_from_json(const json& j);

/**
 * Converts the process XML dialect (documented in docs/process-xml.md):
 *
 *   <process id name>
 *     <agents><agent id role="robot|operator"/></agents>
 *     <bom><part id name [anchor]/> <tool id name [anchor]/></bom>
 *     <bop>
 *       <operation id name [agent]>
 *         <description>text</description>
 *         <predecessor ref/> <uses part|tool/> <image src/>
 *         <step [anchor] [position="x y z"] [orientation="w x y z"]/>
 *         <waypoint q="q1 .. q6"/> <sensor name values="v1 v2 .."/>
 *       </operation>
 *     </bop>
 *   </process>
 *
 * Ids are the source ids lowercased, with characters outside [a-z0-9-_.]
 * replaced by '-'. Throws Error(parse) "line L, column C: ..." for malformed
 * XML and Error(validation) "<element path>/@attr: ..." for grammar violations.
 */
ProcessDocument convert(const std::string& xml);

/// Unique ids, resolvable references and acyclic precedence; empty when valid.
std::vector<Violation> validate(const ProcessDocument& d);

std::string stable_id(const std::string& source_id);

/// Exit status of the ingest command: 0 ok, 1 validation failure, 2 parse failure.
struct IngestResult {
  int exit_code = 0;
  std::vector<std::string> messages;
};

/// Converts `in`, validates, and writes canonical JSON to `out` when valid.
IngestResult ingest_file(const std::filesystem::path& in, const std::filesystem::path& out);

}  // namespace arthur::ingest
