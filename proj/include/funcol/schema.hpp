#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "funcol/expr.hpp"
#include "funcol/value.hpp"

namespace funcol {

class Schema;
class Table;
class Column;

enum class TableKind { Primary, Primitive, Product, Projected };
enum class ColumnKind { Stored, Calculate, Link, Project, Accumulate, ProductAttribute };

std::string_view table_kind_name(TableKind k);
std::string_view column_kind_name(ColumnKind k);

// ---------------------------------------------------------------------------
// Column paths (function composition)

/// A composition of columns: the output table of each segment is the input
/// table of the next. Reading a path applies the segments in order with NULL
/// short-circuit.
class ColumnPath {
public:
    ColumnPath() = default;
    explicit ColumnPath(std::vector<Column*> segments);

    const std::vector<Column*>& segments() const noexcept { return segments_; }
    bool empty() const noexcept { return segments_.empty(); }
    std::size_t size() const noexcept { return segments_.size(); }

    Table& input() const;  // input table of the first segment
    Table& output() const; // output table of the last segment

    std::string display() const; // "Product.Price"

private:
    std::vector<Column*> segments_;
};

Value read_path(const ColumnPath& path, RowId row);

// ---------------------------------------------------------------------------
// Definition records

struct CalculateDef {
    ExprPtr expr;                   // null when a native evaluator is used
    RowEvaluator native;
    std::vector<ColumnPath> params; // binding slot i <- params[i]
};

struct LinkDef {
    std::vector<Column*> output_keys;   // columns of the output table
    std::vector<ColumnPath> input_keys; // paths from the input table
};

struct ProjectDef {
    std::vector<Column*> output_keys;   // stored columns of the projected table
    std::vector<ColumnPath> input_keys;
};

struct AccumulateDef {
    ColumnPath group;               // fact table -> this column's input table
    ExprPtr update;                 // references `out`; null when native
    RowEvaluator native;
    std::vector<ColumnPath> fact_params; // paths from the fact table
    Value initial;
};

struct ProductDef {
    std::vector<Column*> dimensions;

    /// Predicate parameter: a path starting at one of the dimensions. The
    /// head dimension is bound to the candidate source row; `tail` (possibly
    /// empty) is read from there.
    struct PredParam {
        std::size_t dimension;
        ColumnPath tail;
    };
    ExprPtr predicate; // null = keep everything
    RowEvaluator native_predicate;
    std::vector<PredParam> predicate_params;
};

using Definition = std::variant<std::monostate, CalculateDef, LinkDef, ProjectDef,
                                AccumulateDef, ProductDef>;

// ---------------------------------------------------------------------------
// Tables

enum class RowStatus : std::uint8_t { Live, Removed };

/// A set: an ordered population of row ordinals. Primitive tables (Integer,
/// Float, Text, Boolean) are intensional - membership by value type, no
/// population. Derived tables (product, projected) are repopulated wholesale
/// by evaluation; retired ordinals are never reused.
class Table {
public:
    const std::string& name() const noexcept { return name_; }
    TableKind kind() const noexcept { return kind_; }
    std::optional<PrimType> primitive_type() const noexcept { return prim_; }
    bool is_derived() const noexcept {
        return kind_ == TableKind::Product || kind_ == TableKind::Projected;
    }
    Schema& schema() const noexcept { return *schema_; }

    /// Live rows in population (insertion) order.
    std::vector<RowId> rows() const;
    std::size_t row_count() const noexcept { return live_; }

    /// True for any ordinal of the current population, removed or not.
    bool contains(RowId row) const noexcept { return row >= base_ && row < next_; }
    bool is_live(RowId row) const noexcept {
        return contains(row) && status_[row - base_] == RowStatus::Live;
    }
    RowId base() const noexcept { return base_; }
    RowId end_ordinal() const noexcept { return next_; }

    RowId add_row(const std::vector<std::pair<std::string, Value>>& assignments);
    RowId add_row_values(std::span<const std::pair<Column*, Value>> assignments);
    void remove_row(RowId row);

    /// Columns whose input table is this one, in creation order.
    const std::vector<Column*>& columns() const noexcept { return columns_; }
    Column* find_column(std::string_view name) const;

    const ProductDef* product_def() const {
        return std::holds_alternative<ProductDef>(def_) ? &std::get<ProductDef>(def_) : nullptr;
    }
    Column* populated_by() const noexcept { return populated_by_; }

    bool dirty() const noexcept { return dirty_; }
    void set_dirty(bool d) noexcept { dirty_ = d; }
    std::uint64_t creation_seq() const noexcept { return seq_; }

    // Population replacement for derived tables; returns the first fresh
    // ordinal. Clears the data of every column whose input is this table.
    RowId replace_population(std::size_t count);

    void check_readable(RowId row) const; // throws UnknownRow

private:
    friend class Schema;
    Table(Schema& schema, std::string name, TableKind kind, std::uint64_t seq,
          std::optional<PrimType> prim);

    Schema* schema_;
    std::string name_;
    TableKind kind_;
    std::optional<PrimType> prim_;
    std::uint64_t seq_;

    RowId base_ = 0;
    RowId next_ = 0;
    std::vector<RowStatus> status_; // indexed by ordinal - base_
    std::size_t live_ = 0;

    std::vector<Column*> columns_;
    Definition def_;                // ProductDef for product tables
    Column* populated_by_ = nullptr; // project column for projected tables
    bool dirty_ = false;

    friend class Column;
};

// ---------------------------------------------------------------------------
// Columns

/// A function from the rows of an input table to values of an output table.
/// Storage is a dense array indexed by ordinal; unassigned outputs read as
/// NULL.
class Column {
public:
    const std::string& name() const noexcept { return name_; }
    std::string qualified_name() const { return input_->name() + "." + name_; }
    Table& input() const noexcept { return *input_; }
    Table& output() const noexcept { return *output_; }
    ColumnKind kind() const noexcept { return kind_; }
    Schema& schema() const noexcept { return *schema_; }

    bool dirty() const noexcept { return dirty_; }
    void set_dirty(bool d) noexcept { dirty_ = d; }
    std::uint64_t creation_seq() const noexcept { return seq_; }

    /// f(x): the stored or derived output for a row; NULL if never assigned.
    Value get(RowId row) const;

    /// f(x) = y. Stored columns only; dirties dependents, changes no set.
    void set(RowId row, const Value& value);

    /// Inverse function: all live input rows whose output equals `value`, in
    /// population order. NULL matches nothing.
    std::vector<RowId> deproject(const Value& value) const;

    const Definition& definition() const noexcept { return def_; }
    const CalculateDef* calculate_def() const { return std::get_if<CalculateDef>(&def_); }
    const LinkDef* link_def() const { return std::get_if<LinkDef>(&def_); }
    const ProjectDef* project_def() const { return std::get_if<ProjectDef>(&def_); }
    const AccumulateDef* accumulate_def() const { return std::get_if<AccumulateDef>(&def_); }

    // Evaluation-side storage access: no kind checks, no dirty propagation.
    void eval_store(RowId row, Value value);
    void clear_data();

private:
    friend class Schema;
    friend class Table;
    Column(Schema& schema, std::string name, Table& input, Table& output,
           ColumnKind kind, std::uint64_t seq);

    std::size_t slot(RowId row) const noexcept { return row - input_->base_; }

    Schema* schema_;
    std::string name_;
    Table* input_;
    Table* output_;
    ColumnKind kind_;
    std::uint64_t seq_;
    bool dirty_ = true;
    std::vector<Value> data_; // indexed by ordinal - input base
    Definition def_;
};

/// Adapts a value for storage under a column with the given output table:
/// NULL passes through, Integer widens to Float, row refs must target the
/// output table. Throws Error(TypeMismatch) otherwise.
Value adapt_for_output(const Value& value, const Table& output);

/// The object view: one entry per column of the table, keyed by column name.
std::map<std::string, Value> read_object(const Table& table, RowId row);

// ---------------------------------------------------------------------------
// Schema

/// The database: named tables plus named columns between them. The four
/// primitive tables are registered on construction and their names are
/// reserved.
class Schema {
public:
    Schema();
    Schema(const Schema&) = delete;
    Schema& operator=(const Schema&) = delete;
    Schema(Schema&& other) noexcept; // tables and columns keep their addresses
    Schema& operator=(Schema&&) = delete;

    Table& create_table(std::string_view name, TableKind kind);
    Column& create_column(std::string_view name, Table& input, Table& output,
                          ColumnKind kind = ColumnKind::Stored);

    Table* find_table(std::string_view name) const;
    Table& table(std::string_view name) const; // throws UnknownTable
    Column& column(std::string_view table, std::string_view name) const;

    Table& primitive(PrimType t) const { return *primitives_[static_cast<int>(t)]; }

    /// All user tables plus primitives, in creation order.
    std::vector<Table*> tables() const;
    std::vector<Column*> columns() const;

    /// Resolves dotted segments to a column path starting at `from`.
    ColumnPath resolve_path(Table& from, std::span<const std::string> segments) const;
    ColumnPath resolve_path(Table& from, std::string_view dotted) const;

    // -- definitions ---------------------------------------------------------

    void define_calculate(Column& column, std::string_view formula);
    void define_calculate(Column& column, RowEvaluator evaluator,
                          std::vector<ColumnPath> params);

    void define_link(Column& column, std::vector<Column*> output_keys,
                     std::vector<ColumnPath> input_keys);

    void define_accumulate(Column& column, ColumnPath group, std::string_view update,
                           Value initial);
    void define_accumulate(Column& column, ColumnPath group, RowEvaluator evaluator,
                           std::vector<ColumnPath> fact_params, Value initial);

    void define_product(Table& table, std::vector<Column*> dimensions,
                        std::optional<std::string> predicate = std::nullopt);

    void define_project(Column& column, std::vector<Column*> output_keys,
                        std::vector<ColumnPath> input_keys);

    // Dirties every node whose evaluation could observe a change at `source`.
    void note_table_changed(Table& table);
    void note_column_changed(Column& column);

private:
    friend class Table;
    friend class Column;

    void check_key_lists(const Table& output, const std::vector<Column*>& output_keys,
                         const std::vector<ColumnPath>& input_keys) const;
    void install_definition(Column& column, ColumnKind kind, Definition def);

    std::vector<std::unique_ptr<Table>> tables_;
    std::vector<std::unique_ptr<Column>> columns_;
    Table* primitives_[4] = {};
    std::uint64_t next_seq_ = 0;
};

} // namespace funcol
