#pragma once

#include <pimflow/truth_table.hpp>

#include <cstdint>
#include <functional>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pimflow
{

/*! \brief An instruction: I inputs, O outputs, one truth table per output.
 *
 * `cost` is carried through the library format but never interpreted.
 */
struct instruction
{
  std::string name;
  std::uint32_t num_inputs{ 0u };
  std::uint32_t num_outputs{ 0u };
  std::vector<truth_table> functions;
  double cost{ 1.0 };

  bool evaluate( std::uint32_t output, std::uint64_t row ) const { return functions[output].get( row ); }
  /*! \brief True if the given output changes with the given input for some assignment. */
  bool output_depends_on( std::uint32_t output, std::uint32_t input ) const
  {
    return functions[output].depends_on( input );
  }

  bool operator==( instruction const& ) const = default;
};

/*! \brief Builds an instruction from a per-output formula over the input row. */
instruction make_instruction( std::string name, std::uint32_t num_inputs,
                              std::vector<std::function<bool( std::uint64_t )>> const& outputs );

/*! \brief Returns the table of one output; throws `library_error` if out of range. */
truth_table const& instruction_truth_table( instruction const& instr, std::uint32_t output_index );

/*! \brief Throws `library_error` on malformed or functionally trivial instructions. */
void validate_instruction( instruction const& instr );

enum class completeness_check
{
  required,
  skipped
};

/*! \brief Named, immutable collection of instructions keyed by name.
 *
 * With `completeness_check::required` the set must contain a NOR2 or NAND2
 * function, or NOT together with AND2 or OR2 (matched by function, not name).
 */
class instruction_set
{
public:
  instruction_set() = default;
  instruction_set( std::string name, std::vector<instruction> instructions,
                   completeness_check check = completeness_check::required );

  std::string const& name() const noexcept { return name_; }
  std::size_t size() const noexcept { return instructions_.size(); }
  std::vector<instruction> const& instructions() const noexcept { return instructions_; }

  bool contains( std::string_view name ) const { return find( name ) != nullptr; }
  instruction const* find( std::string_view name ) const;
  instruction const& at( std::string_view name ) const;

  std::vector<std::string> names() const;
  bool is_functionally_complete() const;
  /*! \brief True if every instruction of `other` is present here with an identical definition. */
  bool includes( instruction_set const& other ) const;

  bool operator==( instruction_set const& other ) const;

private:
  std::string name_;
  std::vector<instruction> instructions_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

/*! \brief Union of two sets; definitions of `a` win on name clashes. No completeness check. */
instruction_set merge_sets( std::string name, instruction_set const& a, instruction_set const& b );

/*! \brief The built-in sets TS0, TS1, IS2 and IS3; throws `unknown_set_error` otherwise. */
instruction_set builtin_set( std::string_view name );
std::vector<std::string> builtin_set_names();

instruction_set parse_library( std::string_view json_text,
                               completeness_check check = completeness_check::required );
instruction_set load_library( std::filesystem::path const& path,
                              completeness_check check = completeness_check::required );
/*! \brief Canonical JSON text; `parse_library( serialize_library( s ) ) == s`. */
std::string serialize_library( instruction_set const& set );

/*! \brief A machine: single-output primitives and the value each output cell must hold before switching. */
struct target_machine
{
  std::string name;
  instruction_set primitives;
  std::map<std::string, bool> init_values;

  bool init_value( std::string const& primitive ) const;
};

/*! \brief TS0 = {NOT, NOR2}; TS1 = {NOT, OR2, AND2}; every primitive initializes to 1. */
target_machine builtin_machine( std::string_view name );

/*! \brief JSON library format plus an optional `"init_values": {name: 0|1}` object (default 1). */
target_machine parse_machine( std::string_view json_text );
target_machine load_machine( std::filesystem::path const& path );
std::string serialize_machine( target_machine const& machine );

/*! \brief Published compute/init cycle counts for the built-in instructions. */
struct reference_latency
{
  std::uint32_t compute;
  std::uint32_t init;
};

/*! \brief Reference latency of a built-in instruction on machine TS0 (column 0) or TS1 (column 1). */
std::optional<reference_latency> published_latency( std::string_view instruction, std::uint32_t column );

} // namespace pimflow
