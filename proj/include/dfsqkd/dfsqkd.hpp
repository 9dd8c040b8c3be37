#pragma once

#include "dfsqkd/random.hpp"
#include "dfsqkd/statevector.hpp"
#include "dfsqkd/noise.hpp"
#include "dfsqkd/codewords.hpp"
#include "dfsqkd/adversary.hpp"
#include "dfsqkd/protocol.hpp"
#include "dfsqkd/oracle.hpp"
