#pragma once

#include <pimflow/isa.hpp>
#include <pimflow/lowering.hpp>

#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

namespace pimflow
{

enum class cell_space
{
  input,
  output,
  scratch
};

/*! \brief Instruction-relative cell: IN:i, OUT:j or S:k. */
struct cell_ref
{
  cell_space space{ cell_space::scratch };
  std::uint32_t index{ 0u };

  std::string to_string() const;
  static cell_ref parse( std::string_view text );

  bool operator==( cell_ref const& ) const = default;
};

enum class op_kind
{
  init,
  compute
};

struct micro_op
{
  op_kind kind{ op_kind::compute };
  /*! INIT: cells set to `value` in one cycle */
  std::vector<cell_ref> cells;
  bool value{ true };
  /*! COMPUTE: primitive applied to `inputs`, switching `output` */
  std::string primitive;
  std::vector<cell_ref> inputs;
  cell_ref output;

  bool operator==( micro_op const& ) const = default;
};

struct microcode_entry
{
  std::string instruction;
  std::vector<micro_op> ops;
  std::uint32_t tc{ 0u };
  std::uint32_t ti{ 0u };
  std::uint32_t scratch_need{ 0u };

  bool operator==( microcode_entry const& ) const = default;
};

struct microcode_table
{
  target_machine machine;
  std::uint32_t scratch_need{ 0u };
  std::vector<microcode_entry> entries;

  microcode_entry const* find( std::string_view instruction ) const;
};

/*! \brief Micro-op sequence for one instruction on a machine.
 *
 * The body comes from the instruction's expansion template into the machine
 * primitives. Every intermediate value gets its own scratch cell, so a single
 * leading INIT per init polarity prepares all written cells. Throws
 * `microcode_error` when more than `scratch_cap` scratch cells are needed.
 */
microcode_entry generate_microcode( instruction const& instr, target_machine const& machine,
                                    template_registry const& registry = template_registry::builtin(),
                                    std::uint32_t scratch_cap = std::numeric_limits<std::uint32_t>::max() );

/*! \brief One entry per ISA instruction, in ISA order; errors name the failing instruction. */
microcode_table build_microcode_table( instruction_set const& isa, target_machine const& machine,
                                       template_registry const& registry = template_registry::builtin() );

struct latency
{
  std::uint32_t tc{ 0u };
  std::uint32_t ti{ 0u };
};

latency instruction_latency( instruction const& instr, target_machine const& machine );

/*! \brief JSON table; the machine definition is embedded unless it is a built-in machine. */
std::string serialize_microcode( microcode_table const& table );
microcode_table parse_microcode( std::string_view json_text );
microcode_table load_microcode( std::filesystem::path const& path );

} // namespace pimflow
