//! Deterministic stand-in for the masked-LM scoring sidecar.
//!
//! Speaks the sidecar protocol and answers every `score` request with
//! `scores[i] = (i + 1) / len(tokens)`. Extra flags inject faults so the
//! transport's failure handling can be tested without a model.

use std::io::{self, BufRead, Write};

use clap::Parser;
use erseg::scorer::subprocess::{Message, PROTOCOL_VERSION};

#[derive(Debug, Parser)]
#[command(name = "erseg-stub-sidecar", about = "Stub gap-scoring sidecar")]
struct Args {
    /// Buffer this many requests and answer them in reverse order.
    #[arg(long, default_value_t = 1)]
    reverse: usize,
    /// Exit without answering once this many requests have been received.
    #[arg(long)]
    exit_after: Option<usize>,
    /// Never answer score requests.
    #[arg(long)]
    hang: bool,
    /// Answer this id with an error message.
    #[arg(long)]
    fail_id: Option<String>,
    /// Return one score too many.
    #[arg(long)]
    wrong_length: bool,
    /// Exit before the handshake.
    #[arg(long)]
    no_ready: bool,
    /// Protocol version announced in `ready`.
    #[arg(long, default_value_t = PROTOCOL_VERSION)]
    version: u32,
}

fn answer(args: &Args, id: String, tokens: &[String]) -> Message {
    if args.fail_id.as_deref() == Some(id.as_str()) {
        return Message::Error {
            id: Some(id),
            message: "injected failure".into(),
        };
    }
    let n = tokens.len();
    let mut scores: Vec<f64> = (0..n).map(|i| (i + 1) as f64 / n as f64).collect();
    if args.wrong_length {
        scores.push(1.0);
    }
    Message::Scores { id, scores }
}

fn main() -> io::Result<()> {
    let args = Args::parse();
    if args.no_ready {
        return Ok(());
    }
    let stdin = io::stdin();
    let mut out = io::stdout().lock();
    let mut buffered: Vec<Message> = Vec::new();
    let mut received = 0usize;

    let flush = |buffered: &mut Vec<Message>, out: &mut dyn Write| -> io::Result<()> {
        while let Some(m) = buffered.pop() {
            out.write_all(m.to_line().as_bytes())?;
        }
        out.flush()
    };

    for line in stdin.lock().lines() {
        let line = line?;
        let message = match serde_json::from_str::<Message>(&line) {
            Ok(m) => m,
            Err(e) => {
                let reply = Message::Error {
                    id: None,
                    message: format!("malformed request: {e}"),
                };
                out.write_all(reply.to_line().as_bytes())?;
                out.flush()?;
                continue;
            }
        };
        match message {
            Message::Hello { .. } => {
                let reply = Message::Ready {
                    version: args.version,
                    scorer: "stub".into(),
                };
                out.write_all(reply.to_line().as_bytes())?;
                out.flush()?;
            }
            Message::Score { id, tokens, .. } => {
                received += 1;
                if args.exit_after.is_some_and(|n| received > n) {
                    std::process::exit(3);
                }
                if args.hang {
                    continue;
                }
                buffered.push(answer(&args, id, &tokens));
                if buffered.len() >= args.reverse {
                    flush(&mut buffered, &mut out)?;
                }
            }
            Message::Bye => {
                flush(&mut buffered, &mut out)?;
                out.write_all(Message::Bye.to_line().as_bytes())?;
                out.flush()?;
                return Ok(());
            }
            other => {
                let reply = Message::Error {
                    id: None,
                    message: format!("unexpected message {other:?}"),
                };
                out.write_all(reply.to_line().as_bytes())?;
                out.flush()?;
            }
        }
    }
    flush(&mut buffered, &mut out)
}
