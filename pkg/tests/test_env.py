import pytest

from webnav.corpus import RawDocument, compile_graph
from webnav.env import EnvConfig, NavEnv, contains
from webnav.errors import BudgetExceeded, DataError, EpisodeOver, MoveUnexplored
from webnav.tasks import Example


@pytest.fixture
def world():
    docs = [
        RawDocument(title="Hub", body="The hub. " + " ".join(f"[[N{i}]]" for i in range(6))),
        RawDocument(title="N0", body="Zero body. The secret phrase lives here."),
        RawDocument(title="N1", body="One body text."),
        RawDocument(title="N2", body="Two body text. The secret phrase lives here."),
        RawDocument(title="N3", body="Three links back [[Hub]]."),
        RawDocument(title="N4", body="Four."),
        RawDocument(title="N5", body="Five."),
    ]
    return compile_graph(iter(docs), "Hub")


@pytest.fixture
def example(world):
    return Example(
        query="The secret phrase lives here.",
        target=world.node_id("N0"),
        path=(0, world.node_id("N0")),
    )


def env_of(world, n_n=4, n_h=8, blind=False):
    return NavEnv(world, EnvConfig(n_n=n_n, n_h=n_h, allow_blind_moves=blind))


# --- contains ----------------------------------------------------------------

def test_contains_full_text():
    assert contains("exactly this", "exactly this")


def test_contains_ignores_punctuation_and_case():
    assert contains("The Secret, PHRASE; lives here", "the secret phrase LIVES here!")


def test_contains_rejects_extra_word():
    assert not contains("the secret phrase lives here", "secret phrase never lives")


def test_contains_requires_contiguity():
    assert not contains("a b c d", "a c")


def test_contains_empty_query_is_invalid():
    with pytest.raises(DataError):
        contains("text", "...")


# --- reset / observe ---------------------------------------------------------

def test_reset_starts_at_start(world, example):
    env = env_of(world)
    st, obs = env.reset(example)
    assert obs.title == "Hub"
    assert obs.out_degree == 6
    assert obs.peeked == {}
    assert st.hops_taken == 0


def test_reset_twice_identical(world, example):
    env = env_of(world)
    _, obs1 = env.reset(example)
    _, obs2 = env.reset(example)
    assert obs1 == obs2


def test_observation_out_degree_matches_graph(world, example):
    env = env_of(world)
    _, obs = env.reset(example)
    assert obs.out_degree == len(world.edges[world.start_node])


# --- peek ---------------------------------------------------------------------

def test_peek_budget_enforced(world, example):
    env = env_of(world, n_n=4)
    st, _ = env.reset(example)
    for i in range(4):
        obs = env.peek(st, i)
    assert set(obs.peeked) == {0, 1, 2, 3}
    with pytest.raises(BudgetExceeded):
        env.peek(st, 4)


def test_repeek_is_free(world, example):
    env = env_of(world, n_n=2)
    st, _ = env.reset(example)
    env.peek(st, 0)
    env.peek(st, 0)
    env.peek(st, 1)
    obs = env.peek(st, 1)
    assert set(obs.peeked) == {0, 1}
    with pytest.raises(BudgetExceeded):
        env.peek(st, 2)


def test_peek_bad_index(world, example):
    env = env_of(world)
    st, _ = env.reset(example)
    with pytest.raises(IndexError):
        env.peek(st, 6)


def test_peek_reveals_neighbor_text(world, example):
    env = env_of(world)
    st, _ = env.reset(example)
    obs = env.peek(st, 0)
    assert obs.peeked[0][0] == "N0"
    assert "secret phrase" in obs.peeked[0][1]


def test_observation_never_reveals_unpeeked(world, example):
    env = env_of(world)
    st, _ = env.reset(example)
    obs = env.peek(st, 1)
    assert set(obs.peeked) == {1}


# --- move / stop / give up -----------------------------------------------------

def test_move_requires_prior_peek(world, example):
    env = env_of(world)
    st, _ = env.reset(example)
    with pytest.raises(MoveUnexplored):
        env.step_move(st, 0)
    env.peek(st, 0)
    obs = env.step_move(st, 0)
    assert obs.title == "N0"
    assert st.hops_taken == 1
    assert obs.peeked == {}  # cleared at the new node


def test_blind_moves_flag(world, example):
    env = env_of(world, blind=True)
    st, _ = env.reset(example)
    env.step_move(st, 2)
    assert st.current == world.node_id("N2")


def test_follow_supervised_path_and_stop(world, example):
    env = env_of(world, blind=True)
    st, _ = env.reset(example)
    for a, b in zip(example.path, example.path[1:]):
        env.step_move(st, world.edges[a].index(b))
    assert st.current == example.target
    assert env.step_stop(st) == 1
    assert st.outcome.kind == "stopped"


def test_hop_limit_forces_failure(world, example):
    env = env_of(world, n_h=2, blind=True)
    st, _ = env.reset(example)
    env.step_move(st, 3)  # N3 links back to Hub
    obs = env.step_move(st, 0)
    assert st.finished
    assert st.outcome.kind == "hop-limit"
    assert st.outcome.reward == 0
    with pytest.raises(EpisodeOver):
        env.step_move(st, 0)
    with pytest.raises(EpisodeOver):
        env.step_stop(st)


def test_hops_counter(world, example):
    env = env_of(world, n_h=10, blind=True)
    st, _ = env.reset(example)
    env.step_move(st, 3)
    env.step_move(st, 0)
    env.step_move(st, 3)
    assert st.hops_taken == 3


def test_stop_at_start_for_distant_query(world, example):
    env = env_of(world)
    st, _ = env.reset(example)
    assert env.step_stop(st) == 0


def test_stop_at_non_target_containing_node(world, example):
    # N2 also contains the phrase: multi-target semantics pay the reward
    env = env_of(world, blind=True)
    st, _ = env.reset(example)
    env.step_move(st, 2)
    assert st.current != example.target
    assert env.step_stop(st) == 1


def test_give_up(world, example):
    env = env_of(world)
    st, _ = env.reset(example)
    env.give_up(st)
    assert st.outcome.kind == "gave-up"
    assert st.outcome.reward == 0
    with pytest.raises(EpisodeOver):
        env.give_up(st)


def test_transcript_replay_reproduces_outcome(world, example):
    actions = [("peek", 2), ("move", 2), ("stop", None)]

    def run():
        env = env_of(world)
        st, _ = env.reset(example)
        for kind, arg in actions:
            if kind == "peek":
                env.peek(st, arg)
            elif kind == "move":
                env.step_move(st, arg)
            else:
                env.step_stop(st)
        return st.outcome

    assert run() == run()
