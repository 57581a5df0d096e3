#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace pimflow
{

/*! \brief Base class of all diagnosed failures raised by the toolchain. */
class error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/*! \brief Text input could not be parsed; carries the 1-based line number (0 if unknown). */
class parse_error : public error
{
public:
  parse_error( std::string const& what, std::size_t line )
      : error( line == 0u ? what : "line " + std::to_string( line ) + ": " + what ),
        line_( line )
  {
  }

  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

class unknown_set_error : public error
{
public:
  using error::error;
};

/*! \brief A library violates an instruction or instruction-set invariant. */
class library_error : public error
{
public:
  using error::error;
};

/*! \brief A netlist violates a structural invariant (arity, drivers, loops). */
class netlist_error : public error
{
public:
  using error::error;
};

/*! \brief Gate-level cycle between multi-output gates; the mapper requires a DAG. */
class circular_dependency_error : public error
{
public:
  explicit circular_dependency_error( std::vector<std::string> gates );

  std::vector<std::string> const& gates() const noexcept { return gates_; }

private:
  std::vector<std::string> gates_;
};

class no_expansion_path_error : public error
{
public:
  no_expansion_path_error( std::string const& instruction, std::string const& target );

  std::string const& instruction() const noexcept { return instruction_; }

private:
  std::string instruction_;
};

/*! \brief The row ran out of free cells during allocation. */
class row_overflow_error : public error
{
public:
  row_overflow_error( std::uint32_t peak_live, std::uint32_t row_size );

  std::uint32_t peak_live() const noexcept { return peak_live_; }
  std::uint32_t row_size() const noexcept { return row_size_; }

private:
  std::uint32_t peak_live_;
  std::uint32_t row_size_;
};

class microcode_error : public error
{
public:
  using error::error;
};

/*! \brief Runtime trap of the row simulator (read of an undefined cell, bad address). */
class simulation_fault : public error
{
public:
  simulation_fault( std::string const& what, std::uint64_t cycle, std::uint32_t cell );

  std::uint64_t cycle() const noexcept { return cycle_; }
  std::uint32_t cell() const noexcept { return cell_; }
  /*! message without the cycle/cell suffix */
  std::string const& detail() const noexcept { return detail_; }

private:
  std::string detail_;
  std::uint64_t cycle_;
  std::uint32_t cell_;
};

/*! \brief Diagnosis name of the most derived error class, e.g. `RowOverflow`. */
char const* error_kind( error const& e ) noexcept;

} // namespace pimflow
