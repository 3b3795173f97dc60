//======================================================================================================================
//
//! \file ResultsStore.cpp
//
//======================================================================================================================
#include "blockforge/driver/ResultsStore.h"

#include <sqlite3.h>

#include <chrono>
#include <ctime>

namespace blockforge::driver {

namespace {

class Statement
{
 public:
   Statement(sqlite3* db, const char* sql)
   {
      if (sqlite3_prepare_v2(db, sql, -1, &stmt_, nullptr) != SQLITE_OK)
         throw ResultsError(std::string("results store: ") + sqlite3_errmsg(db));
   }
   ~Statement() { sqlite3_finalize(stmt_); }
   Statement(const Statement&)            = delete;
   Statement& operator=(const Statement&) = delete;

   sqlite3_stmt* get() { return stmt_; }

 private:
   sqlite3_stmt* stmt_ = nullptr;
};

std::string utcNow()
{
   const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
   std::tm tm{};
   gmtime_r(&t, &tm);
   char buf[32];
   std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
   return buf;
}

std::string columnText(sqlite3_stmt* s, int i)
{
   const auto* p = sqlite3_column_text(s, i);
   return p ? std::string(reinterpret_cast<const char*>(p), std::size_t(sqlite3_column_bytes(s, i))) : std::string();
}

} // namespace

ResultsStore::ResultsStore(const std::string& path) : path_(path)
{
   if (sqlite3_open(path.c_str(), &db_) != SQLITE_OK)
   {
      const std::string msg = db_ ? sqlite3_errmsg(db_) : "out of memory";
      sqlite3_close(db_);
      throw ResultsError("cannot open results store '" + path + "': " + msg);
   }
   try
   {
      exec("CREATE TABLE IF NOT EXISTS runs (run_id INTEGER PRIMARY KEY, scenario TEXT NOT NULL, "
           "started_at TEXT NOT NULL, config_text TEXT NOT NULL)");
      exec("CREATE TABLE IF NOT EXISTS results (run_id INTEGER NOT NULL REFERENCES runs(run_id), "
           "step INTEGER NOT NULL, name TEXT NOT NULL, value, PRIMARY KEY (run_id, step, name))");
   }
   catch (...)
   {
      sqlite3_close(db_);
      throw;
   }
}

ResultsStore::~ResultsStore()
{
   try
   {
      flush();
   }
   catch (...)
   {
   }
   sqlite3_close(db_);
}

void ResultsStore::exec(const std::string& sql)
{
   char* error = nullptr;
   if (sqlite3_exec(db_, sql.c_str(), nullptr, nullptr, &error) != SQLITE_OK)
   {
      const std::string msg = error ? error : "unknown error";
      sqlite3_free(error);
      throw ResultsError("results store '" + path_ + "': " + msg);
   }
}

void ResultsStore::begin()
{
   if (inTransaction_) return;
   exec("BEGIN");
   inTransaction_ = true;
}

void ResultsStore::flush()
{
   if (!inTransaction_) return;
   exec("COMMIT");
   inTransaction_ = false;
}

std::int64_t ResultsStore::beginRun(const std::string& scenario, const std::string& configText, std::string startedAt)
{
   if (startedAt.empty()) startedAt = utcNow();
   begin();
   Statement s(db_, "INSERT INTO runs (scenario, started_at, config_text) VALUES (?, ?, ?)");
   sqlite3_bind_text(s.get(), 1, scenario.c_str(), int(scenario.size()), SQLITE_TRANSIENT);
   sqlite3_bind_text(s.get(), 2, startedAt.c_str(), int(startedAt.size()), SQLITE_TRANSIENT);
   sqlite3_bind_text(s.get(), 3, configText.c_str(), int(configText.size()), SQLITE_TRANSIENT);
   if (sqlite3_step(s.get()) != SQLITE_DONE) throw ResultsError(std::string("results store: ") + sqlite3_errmsg(db_));
   const std::int64_t id = sqlite3_last_insert_rowid(db_);
   flush();
   return id;
}

void ResultsStore::record(const ResultRecord& r)
{
   begin();
   Statement s(db_, "INSERT INTO results (run_id, step, name, value) VALUES (?, ?, ?, ?)");
   sqlite3_bind_int64(s.get(), 1, r.runId);
   sqlite3_bind_int64(s.get(), 2, r.step);
   sqlite3_bind_text(s.get(), 3, r.name.c_str(), int(r.name.size()), SQLITE_TRANSIENT);
   if (const auto* d = std::get_if<double>(&r.value)) sqlite3_bind_double(s.get(), 4, *d);
   else
   {
      const auto& text = std::get<std::string>(r.value);
      sqlite3_bind_text(s.get(), 4, text.c_str(), int(text.size()), SQLITE_TRANSIENT);
   }
   const int rc = sqlite3_step(s.get());
   if (rc == SQLITE_CONSTRAINT)
      throw ResultsError("duplicate result '" + r.name + "' for run " + std::to_string(r.runId) + " at step " +
                         std::to_string(r.step));
   if (rc != SQLITE_DONE) throw ResultsError(std::string("results store: ") + sqlite3_errmsg(db_));
}

std::vector<RunInfo> ResultsStore::runs() const
{
   Statement s(db_, "SELECT run_id, scenario, started_at, config_text FROM runs ORDER BY run_id");
   std::vector<RunInfo> out;
   while (sqlite3_step(s.get()) == SQLITE_ROW)
      out.push_back({ sqlite3_column_int64(s.get(), 0), columnText(s.get(), 1), columnText(s.get(), 2),
                      columnText(s.get(), 3) });
   return out;
}

std::vector<ResultRecord> ResultsStore::results(std::int64_t runId) const
{
   Statement s(db_, "SELECT step, name, value FROM results WHERE run_id = ? ORDER BY step, rowid");
   sqlite3_bind_int64(s.get(), 1, runId);
   std::vector<ResultRecord> out;
   while (sqlite3_step(s.get()) == SQLITE_ROW)
   {
      ResultRecord r;
      r.runId = runId;
      r.step  = sqlite3_column_int64(s.get(), 0);
      r.name  = columnText(s.get(), 1);
      if (sqlite3_column_type(s.get(), 2) == SQLITE_TEXT) r.value = columnText(s.get(), 2);
      else r.value = sqlite3_column_double(s.get(), 2);
      out.push_back(std::move(r));
   }
   return out;
}

} // namespace blockforge::driver
