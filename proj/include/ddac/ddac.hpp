#pragma once

// Umbrella header for the controller core (no HTTP or CLI dependencies).
#include "ddac/blackboard.hpp"
#include "ddac/document.hpp"
#include "ddac/explain.hpp"
#include "ddac/model.hpp"
#include "ddac/resolver.hpp"
#include "ddac/scalar.hpp"
#include "ddac/simulator.hpp"
#include "ddac/validate.hpp"
