use super::{EmConfig, MinPq, Record};
use crate::error::{Error, Result};

/// Time Forward Processing over events numbered by `u64`.
///
/// Events are visited in increasing order. Each event first collects the
/// messages addressed to it and may then send messages to later events.
pub struct TimeForward<V: Record> {
    pq: MinPq<u64, V>,
    processed: Option<u64>,
}

impl<V: Record> TimeForward<V> {
    pub fn new(cfg: &EmConfig) -> Self {
        TimeForward {
            pq: MinPq::new(cfg),
            processed: None,
        }
    }

    /// Queues `payload` for event `recipient`.
    pub fn send(&mut self, recipient: u64, payload: V) -> Result<()> {
        if let Some(p) = self.processed {
            if recipient <= p {
                return Err(Error::Usage(format!(
                    "message to event {recipient} which is not after the current event {p}"
                )));
            }
        }
        self.pq.push(recipient, payload)
    }

    /// Marks `event` as current and appends its messages to `out`.
    pub fn receive_into(&mut self, event: u64, out: &mut Vec<V>) -> Result<()> {
        if let Some(p) = self.processed {
            if event <= p {
                return Err(Error::Usage(format!(
                    "event {event} visited after event {p}"
                )));
            }
        }
        self.processed = Some(event);
        while let Some(k) = self.pq.peek_key() {
            if k > event {
                break;
            }
            let (k, v) = self.pq.pop()?.expect("peeked");
            if k < event {
                return Err(Error::Usage(format!(
                    "message for event {k} was never received"
                )));
            }
            out.push(v);
        }
        Ok(())
    }

    pub fn receive(&mut self, event: u64) -> Result<Vec<V>> {
        let mut out = Vec::new();
        self.receive_into(event, &mut out)?;
        Ok(out)
    }

    pub fn pending(&self) -> u64 {
        self.pq.len()
    }
}

/// Delivers pre-issued `messages` to events `0..events` in order.
///
/// Every message must address an event in range; the result holds the
/// payloads received by each event.
pub fn tfp_send_receive<V: Record>(
    events: u64,
    messages: impl IntoIterator<Item = (u64, V)>,
    cfg: &EmConfig,
) -> Result<Vec<Vec<V>>> {
    let mut tfp = TimeForward::new(cfg);
    for (to, payload) in messages {
        if to >= events {
            return Err(Error::Usage(format!("message to unknown event {to}")));
        }
        tfp.send(to, payload)?;
    }
    (0..events).map(|e| tfp.receive(e)).collect()
}
