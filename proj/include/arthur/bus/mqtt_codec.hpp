#pragma once

// MQTT 3.1.1 packet encoding for the subset the bus uses: QoS 0/1 publish,
// retained messages, subscribe/unsubscribe, keepalive.

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace arthur::bus::mqtt {

enum class PacketType : std::uint8_t {
  connect = 1,
  connack = 2,
  publish = 3,
  puback = 4,
  subscribe = 8,
  suback = 9,
  unsubscribe = 10,
  unsuback = 11,
  pingreq = 12,
  pingresp = 13,
  disconnect = 14,
};

struct Packet {
  PacketType type;
  std::uint8_t flags = 0;
  std::string body;
};

struct Connect {
  std::string client_id;
  std::uint16_t keepalive_s = 0;
  bool clean_session = true;
};

struct Publish {
  std::string topic;
  std::string payload;
  std::uint8_t qos = 0;
  bool retain = false;
  bool dup = false;
  std::uint16_t packet_id = 0;
};

struct Subscribe {
  std::uint16_t packet_id = 0;
  std::vector<std::pair<std::string, std::uint8_t>> filters;
};

std::string encode_connect(const Connect& c);
std::string encode_connack(std::uint8_t return_code);
std::string encode_publish(const Publish& p);
std::string encode_puback(std::uint16_t packet_id);
std::string encode_subscribe(const Subscribe& s);
std::string encode_suback(std::uint16_t packet_id, const std::vector<std::uint8_t>& codes);
std::string encode_unsubscribe(std::uint16_t packet_id, const std::vector<std::string>& filters);
std::string encode_unsuback(std::uint16_t packet_id);
std::string encode_empty(PacketType type);

/// Removes and returns one complete packet from the front of `buffer`, if present.
/// Throws Error(parse) on a malformed fixed header.
std::optional<Packet> extract_packet(std::string& buffer);

Connect decode_connect(const Packet& p);
std::uint8_t decode_connack(const Packet& p);
Publish decode_publish(const Packet& p);
Subscribe decode_subscribe(const Packet& p);
std::pair<std::uint16_t, std::vector<std::string>> decode_unsubscribe(const Packet& p);
std::uint16_t decode_packet_id(const Packet& p);

}  // namespace arthur::bus::mqtt
