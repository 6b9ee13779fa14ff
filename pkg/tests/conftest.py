import pytest

from corpusforge import synthlang
from corpusforge.langid import Detector, train_profile
from corpusforge.service import AppContext, ServiceConfig, build_context, create_app
from corpusforge.simulate import build_exam_fixtures

SIM_LANGS = ("che", "rus", "fuv", "eng")


@pytest.fixture(scope="session")
def detector() -> Detector:
    """Detector over the four pipeline languages, 150k chars each."""
    return Detector(
        train_profile([synthlang.corpus(lang, 150_000, "seed")], lang)
        for lang in SIM_LANGS
    )


@pytest.fixture()
def ctx(detector) -> AppContext:
    return build_context(detector, ServiceConfig())


@pytest.fixture()
def app(ctx):
    forms, _ = build_exam_fixtures(ctx.config.directions)
    for form in forms.values():
        ctx.store.install_exam(form)
    return create_app(ctx)
