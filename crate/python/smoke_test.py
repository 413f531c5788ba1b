"""Smoke test for the uqa extension module.

Build and install first, e.g. `maturin develop -m crates/py/Cargo.toml`.
"""

import uqa


def check_queue():
    q = uqa.UpdatableQueue("tail")
    assert q.enqueue(uqa.Message(1, 7, uqa.MessageKind.Status)) == "inserted"
    assert q.enqueue(uqa.Message(2, 7, uqa.MessageKind.Status)) == "replaced_tail"
    assert q.enqueue(uqa.Message(3, 7, uqa.MessageKind.Command)) == "inserted"
    assert q.enqueue(uqa.Message(4, 7, uqa.MessageKind.Status)) == "inserted"
    assert [m.seq for m in q.items()] == [2, 3, 4]
    assert len(q) == 3 and q.replaced == 1 and q.is_conserved()
    head = q.dequeue(0.5)
    assert head.seq == 2 and head.t_dequeued == 0.5

    fifo = uqa.UpdatableQueue("fifo")
    for seq in range(5):
        fifo.enqueue(uqa.Message(seq, 1, uqa.MessageKind.Status))
    assert len(fifo) == 5


def check_classify():
    assert uqa.classify(uqa.MessageKind.Command) == (True, False)
    assert uqa.classify(uqa.MessageKind.Event) == (False, False)
    assert uqa.classify(uqa.MessageKind.Status) == (False, True)


def check_schedule():
    sched = uqa.generate_schedule(1000, seed=3, schedule="uniform")
    assert len(sched) == 1000
    times = [t for t, _ in sched]
    assert all(a < b for a, b in zip(times, times[1:]))
    share = sum(m.kind == uqa.MessageKind.Status for _, m in sched) / len(sched)
    assert 0.6 < share < 0.8, share


def check_experiment():
    tcp = uqa.run_experiment(protocol="tcp", receiver_delay=0.05, messages=300)
    tcp_uqa = uqa.run_experiment(protocol="tcp-uqa", receiver_delay=0.05, messages=300)
    for r in (tcp, tcp_uqa):
        assert r["conserved"] and r["messages_sent"] == 300
    assert tcp["acks_generated"] == 300
    assert tcp_uqa["avg_queue_len"] < tcp["avg_queue_len"]
    try:
        uqa.run_experiment(protocol="sctp")
    except ValueError:
        pass
    else:
        raise AssertionError("bad protocol accepted")


if __name__ == "__main__":
    check_queue()
    check_classify()
    check_schedule()
    check_experiment()
    print("uqa smoke test ok")
