from django.apps import AppConfig


class MainConfig(AppConfig):
    name = "forge.main"
    verbose_name = "forge analyses"
