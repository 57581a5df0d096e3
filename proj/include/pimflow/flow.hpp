#pragma once

#include <pimflow/benchgen.hpp>
#include <pimflow/lowering.hpp>
#include <pimflow/mapper.hpp>
#include <pimflow/microcode.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace pimflow
{

inline constexpr std::uint32_t default_row_size = 512u;

/*! \brief lower_to_isa, gate-level cycle check, scheduling.
 *
 * Throws `circular_dependency_error` or `row_overflow_error` as diagnosed failures.
 */
compiled_program compile( netlist const& ntk, instruction_set const& isa, std::uint32_t row_size = default_row_size,
                          template_registry const& registry = template_registry::builtin() );

struct metrics
{
  std::string benchmark;
  std::string isa;
  std::string machine;
  std::size_t code_size{ 0u };
  std::uint64_t compute_cycles{ 0u };
  std::uint64_t init_cycles{ 0u };
  std::uint64_t total_cycles{ 0u };
  std::uint32_t peak_live_cells{ 0u };
  std::uint32_t scratch_need{ 0u };
};

/*! \brief Static accounting from per-instruction tc/ti; throws `microcode_error` on a missing entry. */
metrics compute_metrics( compiled_program const& program, microcode_table const& table );

/*! \brief Instruction set by built-in name or library file path. */
instruction_set resolve_isa( std::string const& name_or_path );
/*! \brief Machine by built-in name or machine file path. */
target_machine resolve_machine( std::string const& name_or_path );

struct sweep_config
{
  /*! benchmark specs (`adder:8`, ...) or netlist file paths */
  std::vector<std::string> benchmarks;
  std::vector<std::string> isas;
  std::vector<std::string> machines;
  std::uint32_t row_size{ default_row_size };
  /*! instruction set the generated benchmarks are written in */
  std::string base_set{ "IS2" };
};

sweep_config parse_sweep_config( std::string_view json_text );
sweep_config load_sweep_config( std::filesystem::path const& path );

struct sweep_row
{
  metrics m;
  /*! empty on success, otherwise the diagnosis for this cell */
  std::string error;
  /*! relative to the benchmark's TS0/TS0 cell when that cell succeeded */
  std::optional<double> norm_code_size;
  std::optional<double> norm_total_cycles;
};

/*! \brief One row per (benchmark, isa, machine) in configuration order; failures stay in-row. */
std::vector<sweep_row> sweep( sweep_config const& config );

std::string sweep_csv( std::vector<sweep_row> const& rows );
std::string sweep_json( std::vector<sweep_row> const& rows );
std::string metrics_json( metrics const& m );

} // namespace pimflow
