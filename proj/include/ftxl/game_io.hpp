#pragma once

#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ftxl/errors.hpp"
#include "ftxl/harness.hpp"

namespace ftxl {

/// A game read from JSON, with the equilibrium it names (if any).
struct LoadedGame {
   GameSpec game;
   std::optional< PureProfile > equilibrium;
};

/// Accepted shapes:
///   {"players": N, "actions": [m_1..m_N], "payoffs": [...], "equilibrium": [a_1..a_N]}
///     payoffs are flat, row-major over (player, a_1, ..., a_N);
///   {"generator": "congestion", "players": N, "cost_fixed": c}
inline LoadedGame parse_game(const nlohmann::json& j)
{
   try {
      if(j.contains("generator")) {
         const auto kind = j.at("generator").get< std::string >();
         if(kind != "congestion") {
            throw InvalidGame("unknown game generator '" + kind + "'");
         }
         const auto players = j.at("players").get< std::size_t >();
         const double cost = j.value("cost_fixed", 1.1);
         LoadedGame out{CongestionGame(players, cost), std::nullopt};
         if(j.contains("equilibrium")) {
            out.equilibrium = PureProfile{j.at("equilibrium").get< std::vector< std::size_t > >()};
         }
         return out;
      }
      const auto players = j.at("players").get< std::size_t >();
      auto actions = j.at("actions").get< std::vector< std::size_t > >();
      if(actions.size() != players) {
         throw InvalidGame("'actions' must list one count per player");
      }
      LoadedGame out{NormalFormGame(std::move(actions), j.at("payoffs").get< std::vector< double > >()),
                     std::nullopt};
      if(j.contains("equilibrium")) {
         out.equilibrium = PureProfile{j.at("equilibrium").get< std::vector< std::size_t > >()};
      }
      return out;
   } catch(const nlohmann::json::exception& e) {
      throw InvalidGame(std::string("malformed game description: ") + e.what());
   }
}

inline LoadedGame load_game(const std::string& path)
{
   std::ifstream in(path);
   if(not in) {
      throw InvalidConfiguration("cannot open game file '" + path + "'");
   }
   nlohmann::json j;
   try {
      in >> j;
   } catch(const nlohmann::json::exception& e) {
      throw InvalidGame("'" + path + "' is not valid JSON: " + e.what());
   }
   return parse_game(j);
}

}  // namespace ftxl
