#pragma once

#include <pimflow/mapper.hpp>
#include <pimflow/microcode.hpp>
#include <pimflow/netlist.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace pimflow
{

/*! \brief One crossbar row plus its scratch window; cells start undefined. */
class row_state
{
public:
  explicit row_state( std::size_t size ) : value_( size, false ), defined_( size, false ) {}

  std::size_t size() const noexcept { return value_.size(); }
  bool value( std::size_t cell ) const { return value_.at( cell ); }
  bool defined( std::size_t cell ) const { return defined_.at( cell ); }
  void set( std::size_t cell, bool v )
  {
    value_.at( cell ) = v;
    defined_.at( cell ) = true;
  }

private:
  std::vector<bool> value_;
  std::vector<bool> defined_;
};

/*! \brief A micro-op with absolute cell addresses. */
struct resolved_op
{
  op_kind kind{ op_kind::compute };
  std::vector<std::uint32_t> cells;
  bool value{ true };
  instruction const* primitive{ nullptr };
  bool init_value{ true };
  std::vector<std::uint32_t> inputs;
  std::uint32_t output{ 0u };
};

/*! \brief Applies one op. COMPUTE switches the output only if it holds the primitive's init value.
 *
 * Throws `simulation_fault` when an operand is undefined or the output was never initialized.
 */
void execute_micro_op( row_state& row, resolved_op const& op, std::uint64_t cycle = 0u );

struct trace_record
{
  std::uint64_t cycle;
  std::size_t instr_index;
  std::string instr_name;
  op_kind kind;
  std::vector<std::uint32_t> cells;
  std::vector<bool> values;
};

struct execution_trace
{
  std::vector<trace_record> records;
  std::uint64_t compute_cycles{ 0u };
  std::uint64_t init_cycles{ 0u };
  std::size_t instruction_count{ 0u };

  std::uint64_t total_cycles() const noexcept { return compute_cycles + init_cycles; }
};

struct run_result
{
  bit_vector outputs;
  execution_trace trace;
};

/*! \brief Largest row plus scratch window the simulator accepts. */
inline constexpr std::size_t simulator_capacity = std::size_t{ 1 } << 22;

/*! \brief Splices each step's microcode and executes it cycle by cycle.
 *
 * `inputs` follows the program's input placement order. Scratch refs map to
 * cells above the row. With `record` false only the totals are kept.
 */
run_result run_program( compiled_program const& program, microcode_table const& table, bit_vector const& inputs,
                        bool record = true );

struct mismatch
{
  bit_vector inputs;
  bit_vector expected;
  bit_vector actual;
  /*! non-empty when the run trapped */
  std::string fault;
};

struct verify_report
{
  std::size_t vectors{ 0u };
  std::vector<mismatch> mismatches;
  std::size_t instruction_count{ 0u };
  std::uint64_t compute_cycles{ 0u };
  std::uint64_t init_cycles{ 0u };

  bool ok() const noexcept { return mismatches.empty(); }
  std::uint64_t total_cycles() const noexcept { return compute_cycles + init_cycles; }
};

/*! \brief Runs every vector and compares with the reference evaluation of `ntk`. */
verify_report verify_program( compiled_program const& program, microcode_table const& table, netlist const& ntk,
                              std::vector<bit_vector> const& vectors );

/*! \brief All 2^n vectors, vector k holding bit i of k at input i. */
std::vector<bit_vector> exhaustive_vectors( std::size_t num_inputs );
std::vector<bit_vector> random_vectors( std::size_t num_inputs, std::size_t count, std::uint64_t seed );

/*! \brief Executes an entry on all 2^I operand rows and compares with the instruction. */
bool verify_microcode_entry( microcode_entry const& entry, instruction const& instr, target_machine const& machine );

std::string trace_csv( execution_trace const& trace );
std::string trace_summary_json( execution_trace const& trace );

} // namespace pimflow
