#include "arthur/bus/mqtt_codec.hpp"

#include "arthur/core/error.hpp"

namespace arthur::bus::mqtt {

namespace {

[[noreturn]] void malformed(const std::string& what) { throw Error(ErrorCode::parse, "mqtt: " + what); }

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v >> 8));
  out.push_back(static_cast<char>(v & 0xFF));
}

void put_str(std::string& out, const std::string& s) {
  if (s.size() > 0xFFFF) malformed("string too long");
  put_u16(out, static_cast<std::uint16_t>(s.size()));
  out += s;
}

std::string frame(PacketType type, std::uint8_t flags, const std::string& body) {
  std::string out;
  out.push_back(static_cast<char>((static_cast<std::uint8_t>(type) << 4) | (flags & 0x0F)));
  std::size_t len = body.size();
  if (len > 268435455) malformed("packet too large");
  do {
    std::uint8_t byte = len % 128;
    len /= 128;
    if (len > 0) byte |= 0x80;
    out.push_back(static_cast<char>(byte));
  } while (len > 0);
  out += body;
  return out;
}

class Reader {
 public:
  explicit Reader(const std::string& s) : s_(s) {}
  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(s_[pos_++]);
  }
  std::uint16_t u16() {
    need(2);
    const auto hi = static_cast<std::uint8_t>(s_[pos_]);
    const auto lo = static_cast<std::uint8_t>(s_[pos_ + 1]);
    pos_ += 2;
    return static_cast<std::uint16_t>((hi << 8) | lo);
  }
  std::string str() {
    const auto n = u16();
    need(n);
    std::string out = s_.substr(pos_, n);
    pos_ += n;
    return out;
  }
  std::string rest() {
    std::string out = s_.substr(pos_);
    pos_ = s_.size();
    return out;
  }
  [[nodiscard]] bool done() const { return pos_ >= s_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > s_.size()) malformed("truncated packet");
  }
  const std::string& s_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string encode_connect(const Connect& c) {
  std::string body;
  put_str(body, "MQTT");
  body.push_back(4);  // protocol level 3.1.1
  body.push_back(static_cast<char>(c.clean_session ? 0x02 : 0x00));
  put_u16(body, c.keepalive_s);
  put_str(body, c.client_id);
  return frame(PacketType::connect, 0, body);
}

std::string encode_connack(std::uint8_t return_code) {
  return frame(PacketType::connack, 0, std::string{'\0', static_cast<char>(return_code)});
}

std::string encode_publish(const Publish& p) {
  std::string body;
  put_str(body, p.topic);
  if (p.qos > 0) put_u16(body, p.packet_id);
  body += p.payload;
  const std::uint8_t flags = static_cast<std::uint8_t>((p.dup ? 0x08 : 0) | (p.qos << 1) | (p.retain ? 1 : 0));
  return frame(PacketType::publish, flags, body);
}

std::string encode_puback(std::uint16_t packet_id) {
  std::string body;
  put_u16(body, packet_id);
  return frame(PacketType::puback, 0, body);
}

std::string encode_subscribe(const Subscribe& s) {
  std::string body;
  put_u16(body, s.packet_id);
  for (const auto& [filter, qos] : s.filters) {
    put_str(body, filter);
    body.push_back(static_cast<char>(qos));
  }
  return frame(PacketType::subscribe, 0x02, body);
}

std::string encode_suback(std::uint16_t packet_id, const std::vector<std::uint8_t>& codes) {
  std::string body;
  put_u16(body, packet_id);
  for (auto c : codes) body.push_back(static_cast<char>(c));
  return frame(PacketType::suback, 0, body);
}

std::string encode_unsubscribe(std::uint16_t packet_id, const std::vector<std::string>& filters) {
  std::string body;
  put_u16(body, packet_id);
  for (const auto& f : filters) put_str(body, f);
  return frame(PacketType::unsubscribe, 0x02, body);
}

std::string encode_unsuback(std::uint16_t packet_id) {
  std::string body;
  put_u16(body, packet_id);
  return frame(PacketType::unsuback, 0, body);
}

std::string encode_empty(PacketType type) { return frame(type, 0, {}); }

std::optional<Packet> extract_packet(std::string& buffer) {
  if (buffer.size() < 2) return std::nullopt;
  std::size_t len = 0;
  std::size_t multiplier = 1;
  std::size_t i = 1;
  while (true) {
    if (i >= buffer.size()) return std::nullopt;
    if (i > 4) malformed("remaining length exceeds four bytes");
    const auto byte = static_cast<std::uint8_t>(buffer[i]);
    len += (byte & 0x7F) * multiplier;
    multiplier *= 128;
    ++i;
    if ((byte & 0x80) == 0) break;
  }
  if (buffer.size() < i + len) return std::nullopt;
  const auto first = static_cast<std::uint8_t>(buffer[0]);
  const auto type = first >> 4;
  if (type == 0 || type == 15) malformed("reserved packet type");
  Packet p{static_cast<PacketType>(type), static_cast<std::uint8_t>(first & 0x0F), buffer.substr(i, len)};
  buffer.erase(0, i + len);
  return p;
}

Connect decode_connect(const Packet& p) {
  Reader r(p.body);
  if (r.str() != "MQTT") malformed("unsupported protocol name");
  if (r.u8() != 4) malformed("unsupported protocol level");
  const auto flags = r.u8();
  Connect c;
  c.clean_session = (flags & 0x02) != 0;
  c.keepalive_s = r.u16();
  c.client_id = r.str();
  return c;
}

std::uint8_t decode_connack(const Packet& p) {
  Reader r(p.body);
  (void)r.u8();
  return r.u8();
}

Publish decode_publish(const Packet& p) {
  Reader r(p.body);
  Publish pub;
  pub.retain = (p.flags & 0x01) != 0;
  pub.qos = static_cast<std::uint8_t>((p.flags >> 1) & 0x03);
  pub.dup = (p.flags & 0x08) != 0;
  if (pub.qos > 2) malformed("invalid QoS");
  pub.topic = r.str();
  if (pub.qos > 0) pub.packet_id = r.u16();
  pub.payload = r.rest();
  return pub;
}

Subscribe decode_subscribe(const Packet& p) {
  Reader r(p.body);
  Subscribe s;
  s.packet_id = r.u16();
  while (!r.done()) {
    auto filter = r.str();
    s.filters.emplace_back(std::move(filter), r.u8());
  }
  if (s.filters.empty()) malformed("subscribe without filters");
  return s;
}

std::pair<std::uint16_t, std::vector<std::string>> decode_unsubscribe(const Packet& p) {
  Reader r(p.body);
  const auto id = r.u16();
  std::vector<std::string> filters;
  while (!r.done()) filters.push_back(r.str());
  return {id, filters};
}

std::uint16_t decode_packet_id(const Packet& p) {
  Reader r(p.body);
  return r.u16();
}

}  // namespace arthur::bus::mqtt
