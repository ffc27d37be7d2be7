#pragma once

#include <btcpgp/address.hpp>
#include <btcpgp/amount.hpp>
#include <btcpgp/armor.hpp>
#include <btcpgp/certificate.hpp>
#include <btcpgp/keyserver.hpp>
#include <btcpgp/ledger.hpp>
#include <btcpgp/ledger_io.hpp>
#include <btcpgp/trustops.hpp>
#include <btcpgp/walkthrough.hpp>
