#pragma once

#include <pimflow/netlist.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace pimflow
{

struct program_step
{
  std::string instruction;
  std::vector<std::uint32_t> inputs;
  std::vector<std::uint32_t> outputs;

  bool operator==( program_step const& ) const = default;
};

/*! \brief Target-independent instruction stream over row cell addresses. */
struct compiled_program
{
  std::string isa_name;
  std::uint32_t row_size{ 0u };
  /*! signal name and cell, in declaration order */
  std::vector<std::pair<std::string, std::uint32_t>> input_placement;
  std::vector<std::pair<std::string, std::uint32_t>> output_placement;
  std::vector<program_step> steps;

  std::size_t code_size() const noexcept { return steps.size(); }

  bool operator==( compiled_program const& ) const = default;
};

struct schedule_annotation
{
  /*! per mapping-graph node */
  std::vector<std::uint32_t> cu;
  std::vector<std::uint32_t> fo;
  /*! gate nodes in execution order */
  std::vector<std::uint32_t> order;
  /*! every node, leaves included, in the order the traversal finishes them */
  std::vector<std::uint32_t> visit_order;
};

/*! \brief Cell-usage estimate of every node, plus the depth-first execution order.
 *
 * Leaves have cu 1. A gate sorts its distinct children by descending cu and takes
 * max_i( cu_i + i - 1 ) (i from 1); a gate with O outputs takes at least O.
 * Children are visited by descending cu, ties by smaller node id; roots likewise.
 * Throws `circular_dependency_error` if the gate graph is cyclic.
 */
schedule_annotation compute_cu( mapping_graph const& graph );

/*! \brief Orders the gates and allocates row cells with reuse.
 *
 * Inputs occupy cells 0..|PI|-1; every gate output takes the lowest free cell,
 * and a cell is released once all consumers of its value have executed. Primary
 * outputs hold one extra reference so they are never released. Throws
 * `row_overflow_error` carrying the peak live count when the row is too small.
 */
compiled_program schedule( mapping_graph const& graph, std::uint32_t row_size, std::string isa_name = {} );

/*! \brief Peak number of simultaneously live cells (inputs included) of the schedule, for any row size. */
std::uint32_t peak_live_cells( mapping_graph const& graph );

std::string emit_program( compiled_program const& program );
compiled_program parse_program( std::string_view text );
compiled_program load_program( std::filesystem::path const& path );

struct liveness_report
{
  bool ok{ true };
  std::string message;
  std::uint32_t peak_live{ 0u };
};

/*! \brief Replays the steps: no undefined reads, no step writing one of its own operands, addresses in range. */
liveness_report check_liveness( compiled_program const& program );

} // namespace pimflow
